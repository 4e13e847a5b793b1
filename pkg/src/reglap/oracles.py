"""Brute-force oracles: exact ell_inf->ell_1 (cut) norm, dense spectral norm
via Jacobi rotations, exhaustive Grothendieck sub-matrix search, and the
cut-norm concentration Monte Carlo check.

These are the independent references the fast matrix-free paths are tested
against; none of them share code with the Lanczos solver.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .graph_model import ProbabilityMatrix, model_params, sample_graph

ENUM_LIMIT = 25
SUBSET_LIMIT = 8
DENSE_LIMIT = 512


class EnumerationBudgetError(ValueError):
    """Raised when exact enumeration would exceed the 2^25 budget; use the
    Monte Carlo lower bound instead."""


def inf_to_one_norm_exact(B) -> float:
    """Exact max of x^T B y over sign vectors, enumerating the smaller side.

    For fixed x the optimal y is sign(B^T x), so only the smaller dimension
    is enumerated (Gray-code walk in the compiled kernel).
    """
    B = np.asarray(B, dtype=np.float64)
    m, k = B.shape
    if min(m, k) > ENUM_LIMIT:
        raise EnumerationBudgetError(
            f"min dimension {min(m, k)} exceeds the enumeration budget {ENUM_LIMIT}; "
            "use inf_to_one_lower_bound"
        )
    if m > k:
        B = B.T
    return float(kernels.inf_to_one_exact(np.ascontiguousarray(B)))


def inf_to_one_lower_bound(B, samples: int = 200, seed: int = 0) -> float:
    """Monte Carlo lower bound: random sign starts refined by alternating
    ascent (x -> sign(By), y -> sign(B^T x))."""
    B = np.asarray(B, dtype=np.float64)
    m, k = B.shape
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    best = 0.0
    for _ in range(samples):
        x = rng.choice([-1.0, 1.0], size=m)
        for _ in range(8):
            y = np.sign(B.T @ x)
            y[y == 0] = 1.0
            x_new = np.sign(B @ y)
            x_new[x_new == 0] = 1.0
            if np.array_equal(x_new, x):
                break
            x = x_new
        best = max(best, float(x @ B @ y))
    return best


def jacobi_eigh(S, tol: float = 1e-13, max_sweeps: int = 60):
    """All eigenvalues (descending) and eigenvectors of a symmetric matrix,
    by cyclic Jacobi rotations."""
    S = np.array(S, dtype=np.float64, order="C", copy=True)
    n = S.shape[0]
    if S.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.allclose(S, S.T, atol=1e-12 * max(1.0, np.abs(S).max())):
        raise ValueError("matrix must be symmetric")
    S = (S + S.T) / 2
    V = np.eye(n)
    sweeps = kernels.jacobi_sweeps(S, V, tol, max_sweeps)
    if sweeps < 0:
        raise RuntimeError("Jacobi rotations did not converge")
    evals = np.diag(S).copy()
    order = np.argsort(evals)[::-1]
    return evals[order], V[:, order]


def spectral_norm_dense(B) -> float:
    """Largest singular value of a dense matrix, via Jacobi rotations.

    Symmetric matrices are solved directly; otherwise the smaller Gram
    matrix is diagonalized and the root taken.
    """
    B = np.asarray(B, dtype=np.float64)
    m, k = B.shape
    if max(m, k) > DENSE_LIMIT:
        raise ValueError(f"dense oracle limited to {DENSE_LIMIT}")
    if m == 0 or k == 0 or not B.any():
        return 0.0
    if m == k and np.allclose(B, B.T, atol=1e-12 * np.abs(B).max()):
        evals, _ = jacobi_eigh(B)
        return float(np.abs(evals).max())
    G = B @ B.T if m <= k else B.T @ B
    evals, _ = jacobi_eigh(G)
    return float(math.sqrt(max(float(evals.max()), 0.0)))


@dataclass
class GrothendieckCert:
    """Certificate for the sub-matrix extraction bound."""

    I: tuple
    J: tuple
    opnorm: float
    bound: float
    delta: float
    found: bool = True

    def to_json_dict(self):
        return {
            "I": list(self.I),
            "J": list(self.J),
            "opnorm": self.opnorm,
            "bound": self.bound,
            "delta": self.delta,
            "found": self.found,
        }


def grothendieck_submatrix_search(B, delta: float) -> GrothendieckCert:
    """Exhaustive search for a sub-matrix certificate.

    Candidate (I, J) pairs are visited by total retained size descending
    (ties lexicographic), so the first satisfying certificate is maximal.
    A returned cert with found=False is a counterexample report, which would
    falsify the implementation rather than the existence theorem.
    """
    B = np.asarray(B, dtype=np.float64)
    m, k = B.shape
    if max(m, k) > SUBSET_LIMIT:
        raise ValueError(f"exhaustive subset search limited to {SUBSET_LIMIT}")
    if not (0 < delta):
        raise ValueError("delta must be positive")
    cut = inf_to_one_norm_exact(B)
    bound = 2.0 * cut / (delta * math.sqrt(m * k))
    min_i = math.ceil((1.0 - delta) * m)
    min_j = math.ceil((1.0 - delta) * k)
    sizes = sorted(
        ((si, sj) for si in range(min_i, m + 1) for sj in range(min_j, k + 1)),
        key=lambda t: (-(t[0] + t[1]), -t[0]),
    )
    for si, sj in sizes:
        for I in itertools.combinations(range(m), si):
            sub_rows = B[list(I), :]
            for J in itertools.combinations(range(k), sj):
                opn = spectral_norm_dense(sub_rows[:, list(J)])
                if opn <= bound + 1e-12:
                    return GrothendieckCert(I=I, J=J, opnorm=opn, bound=bound, delta=delta)
    return GrothendieckCert(I=(), J=(), opnorm=math.inf, bound=bound, delta=delta,
                            found=False)


@dataclass
class CutNormReport:
    """Per-replicate cut norms of A - E[A] against the 5 r n sqrt(d) bound."""

    n: int
    d: float
    r: float
    bound: float
    exact: bool
    norms: list = field(default_factory=list)
    exceed_fraction: float = 0.0
    expected_fraction_bound: float = 0.0

    def to_json_dict(self):
        return {
            "n": self.n,
            "d": self.d,
            "r": self.r,
            "bound": self.bound,
            "exact": self.exact,
            "norms": self.norms,
            "exceed_fraction": self.exceed_fraction,
            "expected_fraction_bound": self.expected_fraction_bound,
        }


def cutnorm_concentration_check(P: ProbabilityMatrix, r: float, replicates: int,
                                seed: int = 0, mc_samples: int = 100) -> CutNormReport:
    """Monte Carlo check of the cut-norm concentration bound.

    Exact enumeration for n <= 25; otherwise a sign-sampling lower bound per
    replicate (only lower-bound violations are meaningful there).
    """
    n = P.n
    # only the max-entry degree bound matters here; zero columns are fine
    d = n * P.max_entry()
    bound = 5.0 * r * n * math.sqrt(d)
    exact = n <= ENUM_LIMIT
    Pd = P.dense()
    norms = []
    for rep in range(replicates):
        A = sample_graph(P, seed + rep)
        diff = A.csr.toarray() - Pd
        if exact:
            norms.append(inf_to_one_norm_exact(diff))
        else:
            norms.append(inf_to_one_lower_bound(diff, samples=mc_samples, seed=seed + rep))
    norms = [float(v) for v in norms]
    exceed = sum(v > bound for v in norms) / max(replicates, 1)
    return CutNormReport(
        n=n, d=d, r=r, bound=bound, exact=exact, norms=norms,
        exceed_fraction=exceed,
        expected_fraction_bound=math.exp(-2.0 * r * n),
    )
