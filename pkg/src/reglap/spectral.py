"""Laplacian and regularized-Laplacian linear operators, plus a Lanczos
eigensolver with full reorthogonalization and operator-norm estimation.

Operators are matrix-free: the rank-one regularization term tau*11^T is never
materialized, so a matvec costs O(nnz + n).
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .graph_model import ProbabilityMatrix, SparseAdjacency


class Mode(enum.Enum):
    FULL = "full"      # A_tau = A + tau*11^T, D_tau = D + n*tau*I
    DEGREE = "degree"  # A unchanged, D_tau = D + n*tau*I
    NONE = "none"      # tau = 0, isolated rows/columns zeroed


class Kind(enum.Enum):
    LAPLACIAN = "laplacian"  # I - D^-1/2 A D^-1/2
    AVERAGING = "averaging"  # D^-1/2 A D^-1/2


def degrees(A: SparseAdjacency) -> np.ndarray:
    """d_i = sum_j A_ij (a loop counts once)."""
    return np.asarray(A.csr.sum(axis=1)).ravel().astype(np.int64)


class RegularizedOperator:
    """Symmetric operator for the (regularized) Laplacian or averaging matrix.

    With tau = 0 the isolated-node convention applies: the corresponding
    rows and columns of the materialized matrix are identically zero,
    including the diagonal.
    """

    def __init__(self, A: SparseAdjacency, tau: float, mode: Mode, kind: Kind):
        if tau < 0:
            raise ValueError("tau must be nonnegative")
        self.A = A
        self.n = A.n
        self.tau = float(tau)
        self.mode = mode if tau > 0 else Mode.NONE
        self.kind = kind
        if self.mode is Mode.NONE:
            deg = A.degrees.astype(np.float64)
        else:
            deg = A.degrees + self.n * self.tau
        self.deg_tau = deg
        self.active = deg > 0
        inv = np.zeros(self.n)
        inv[self.active] = 1.0 / np.sqrt(deg[self.active])
        self.inv_sqrt_degrees = inv

    def matvec(self, x: np.ndarray) -> np.ndarray:
        w = self.inv_sqrt_degrees * x
        y = self.A.csr @ w
        if self.mode is Mode.FULL:
            y = y + self.tau * w.sum()
        y *= self.inv_sqrt_degrees
        if self.kind is Kind.LAPLACIAN:
            y = np.where(self.active, x, 0.0) - y
        return y

    def dense(self) -> np.ndarray:
        if self.n > 2048:
            raise ValueError("dense materialization limited to n <= 2048")
        M = self.A.csr.toarray()
        if self.mode is Mode.FULL:
            M = M + self.tau
        M = self.inv_sqrt_degrees[:, None] * M * self.inv_sqrt_degrees[None, :]
        if self.kind is Kind.LAPLACIAN:
            M = np.diag(self.active.astype(float)) - M
        return M


class ExpectedOperator:
    """Same operator family for the expected adjacency (p_ij).

    The structured ProbabilityMatrix matvec keeps this O(n) for block models.
    """

    def __init__(self, P: ProbabilityMatrix, tau: float, mode: Mode, kind: Kind):
        if tau < 0:
            raise ValueError("tau must be nonnegative")
        self.P = P
        self.n = P.n
        self.tau = float(tau)
        self.mode = mode if tau > 0 else Mode.NONE
        self.kind = kind
        deg = P.column_sums()
        if self.mode is not Mode.NONE:
            deg = deg + self.n * self.tau
        self.deg_tau = deg
        self.active = deg > 0
        inv = np.zeros(self.n)
        inv[self.active] = 1.0 / np.sqrt(deg[self.active])
        self.inv_sqrt_degrees = inv

    def matvec(self, x: np.ndarray) -> np.ndarray:
        w = self.inv_sqrt_degrees * x
        y = self.P.matvec(w)
        if self.mode is Mode.FULL:
            y = y + self.tau * w.sum()
        y *= self.inv_sqrt_degrees
        if self.kind is Kind.LAPLACIAN:
            y = np.where(self.active, x, 0.0) - y
        return y

    def dense(self) -> np.ndarray:
        M = self.P.dense().copy()
        if self.mode is Mode.FULL:
            M = M + self.tau
        M = self.inv_sqrt_degrees[:, None] * M * self.inv_sqrt_degrees[None, :]
        if self.kind is Kind.LAPLACIAN:
            M = np.diag(self.active.astype(float)) - M
        return M


class DiffOperator:
    """op1 - op2, by matvec composition."""

    def __init__(self, op1, op2):
        if op1.n != op2.n:
            raise ValueError("operator sizes differ")
        self.op1, self.op2 = op1, op2
        self.n = op1.n

    def matvec(self, x):
        return self.op1.matvec(x) - self.op2.matvec(x)


class NegOperator:
    def __init__(self, op):
        self.op = op
        self.n = op.n

    def matvec(self, x):
        return -self.op.matvec(x)


class RowBlockGram:
    """M^T M for M = P_I op P_J (rows I, columns J of a symmetric op).

    Used to measure operator norms of sub-blocks without densifying:
    ||M|| = sqrt(lambda_max(M^T M)).
    """

    def __init__(self, op, rows, cols):
        self.op = op
        self.n = op.n
        self.rows = np.asarray(rows, dtype=np.int64)
        self.cols = np.asarray(cols, dtype=np.int64)
        self._rmask = np.zeros(self.n, dtype=bool)
        self._rmask[self.rows] = True
        self._cmask = np.zeros(self.n, dtype=bool)
        self._cmask[self.cols] = True

    def matvec(self, x):
        xc = np.where(self._cmask, x, 0.0)
        y = np.where(self._rmask, self.op.matvec(xc), 0.0)
        return np.where(self._cmask, self.op.matvec(y), 0.0)


def make_operator(A: SparseAdjacency, tau: float, mode: Mode = Mode.FULL,
                  kind: Kind = Kind.LAPLACIAN) -> RegularizedOperator:
    return RegularizedOperator(A, tau, mode, kind)


@dataclass
class SpectralResult:
    """Converged eigenpairs, eigenvalues in descending order."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # orthonormal columns
    residuals: np.ndarray     # per-pair ||M v - lambda v||_2
    iterations: int = 0

    def to_json(self) -> str:
        return json.dumps(
            {
                "eigenvalues": self.eigenvalues.tolist(),
                "eigenvectors": self.eigenvectors.tolist(),
                "residuals": self.residuals.tolist(),
                "iterations": self.iterations,
            }
        )


class ConvergenceError(RuntimeError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


def _check_symmetry(op, seed, trials=3, tol=1e-10):
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    for _ in range(trials):
        x = rng.standard_normal(op.n)
        y = rng.standard_normal(op.n)
        x /= np.linalg.norm(x)
        y /= np.linalg.norm(y)
        lhs = float(x @ op.matvec(y))
        rhs = float(y @ op.matvec(x))
        if abs(lhs - rhs) > tol * max(1.0, abs(lhs), abs(rhs)):
            raise ValueError("operator failed the probabilistic symmetry check")


def _start_vector(n, seed):
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed) ^ np.uint64(0xA5A5A5A5)))
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def eig_symmetric(op, k: int, tol: float = 1e-10, seed: int = 0,
                  max_dim: int = 1500, check_every: int = 30) -> SpectralResult:
    """Top-k eigenpairs by algebraic value, via Lanczos with full
    reorthogonalization.

    The Krylov basis grows until the exact residuals ||M v - lambda v|| of
    the top-k Ritz pairs fall below tol, up to min(n, max_dim) vectors.
    Deterministic for a fixed seed.  Raises ConvergenceError (carrying the
    best residuals) if the tolerance is not reached.
    """
    n = op.n
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    _check_symmetry(op, seed)

    cap = min(n, max(max_dim, 2 * k + 10))
    V = np.zeros((n, cap))
    alphas = np.zeros(cap)
    betas = np.zeros(cap)
    V[:, 0] = _start_vector(n, seed)
    j = 0
    res = None
    exhausted = False

    while True:
        w = op.matvec(V[:, j])
        alphas[j] = float(V[:, j] @ w)
        # full reorthogonalization, twice for safety
        for _ in range(2):
            w -= V[:, : j + 1] @ (V[:, : j + 1].T @ w)
        beta = float(np.linalg.norm(w))
        if j + 1 < cap:
            if beta <= 1e-13:
                # invariant subspace hit: continue with a fresh direction
                w = _start_vector(n, seed + j + 7919)
                for _ in range(2):
                    w -= V[:, : j + 1] @ (V[:, : j + 1].T @ w)
                nw = float(np.linalg.norm(w))
                if nw <= 1e-13:
                    exhausted = True
                else:
                    w /= nw
                beta = 0.0
            betas[j] = beta
            if not exhausted:
                V[:, j + 1] = w / np.linalg.norm(w)
        j += 1
        at_cap = exhausted or j >= cap
        if j >= k and (at_cap or j % check_every == 0):
            T = np.diag(alphas[:j]) + np.diag(betas[: j - 1], 1) + np.diag(betas[: j - 1], -1)
            evals, S = np.linalg.eigh(T)
            order = np.argsort(evals)[::-1][:k]
            evals = evals[order]
            X = V[:, :j] @ S[:, order]
            res = np.array(
                [np.linalg.norm(op.matvec(X[:, i]) - evals[i] * X[:, i]) for i in range(k)]
            )
            if np.all(res <= tol):
                Q, _ = np.linalg.qr(X)
                Q *= np.sign(np.einsum("ij,ij->j", Q, X))
                return SpectralResult(
                    eigenvalues=evals.copy(),
                    eigenvectors=Q,
                    residuals=res,
                    iterations=j,
                )
            if at_cap:
                raise ConvergenceError(
                    f"Lanczos did not reach tol={tol} within {j} iterations "
                    f"(best residuals {res})",
                    residuals=res,
                )


def operator_norm(op, tol: float = 1e-8, seed: int = 0) -> float:
    """max |lambda| of a symmetric operator, from both spectrum ends."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    hi = eig_symmetric(op, 1, tol=tol, seed=seed).eigenvalues[0]
    lo = eig_symmetric(NegOperator(op), 1, tol=tol, seed=seed).eigenvalues[0]
    return float(max(abs(hi), abs(lo)))


def submatrix_norm(op, rows, cols, tol: float = 1e-8, seed: int = 0) -> float:
    """||(op)_{rows x cols}|| for a symmetric op, via the Gram operator."""
    if len(rows) == 0 or len(cols) == 0:
        return 0.0
    gram = RowBlockGram(op, rows, cols)
    lam = eig_symmetric(gram, 1, tol=tol, seed=seed).eigenvalues[0]
    return float(np.sqrt(max(lam, 0.0)))


def second_pair_laplacian(A: SparseAdjacency, tau: float,
                          seed: int = 0, tol: float = 1e-10):
    """(eigenvalue, unit eigenvector) for the second smallest eigenvalue of
    L(A_tau), via the second largest pair of the averaging operator.

    Deterministic sign: the first coordinate that is nonzero (beyond 1e-10
    of the max magnitude) is made positive.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    op = RegularizedOperator(A, tau, Mode.FULL, Kind.AVERAGING)
    kk = min(3, A.n)
    res = eig_symmetric(op, kk, tol=tol, seed=seed)
    if A.n >= 3 and res.eigenvalues[1] - res.eigenvalues[2] < 1e-12:
        raise ValueError("eigenvalue gap below 1e-12: second eigenvector ill-defined")
    v = res.eigenvectors[:, 1].copy()
    thresh = 1e-10 * np.abs(v).max()
    lead = np.nonzero(np.abs(v) > thresh)[0][0]
    if v[lead] < 0:
        v = -v
    return float(res.eigenvalues[1]), v / np.linalg.norm(v)


def second_eigenvector_laplacian(A: SparseAdjacency, tau: float,
                                 seed: int = 0, tol: float = 1e-10) -> np.ndarray:
    """Unit eigenvector for the second smallest eigenvalue of L(A_tau)."""
    return second_pair_laplacian(A, tau, seed=seed, tol=tol)[1]
