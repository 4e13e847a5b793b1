"""Inhomogeneous Erdős–Rényi and two-block SBM graph models.

Probability matrices are kept in structured form (block rates + labels) when
possible and materialized row by row; dense storage is only allowed at desk
scale.  Sampling is seeded per row with a counter-based generator, so the
result is independent of evaluation order and bit-reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

DENSE_LIMIT = 10_000


@dataclass(frozen=True)
class ModelParams:
    """Degree parameters of an expected adjacency matrix.

    d: upper bound max_ij n*p_ij, computed exactly.
    d0: minimum expected column sum.
    alpha: d / d0.
    """

    d: float
    d0: float
    alpha: float


@dataclass(frozen=True)
class SbmConfig:
    """Balanced two-block SBM: within-rate a/n, between-rate b/n."""

    n: int
    a: float
    b: float
    permutation: np.ndarray | None = None

    def __post_init__(self):
        if self.n <= 0 or self.n % 2 != 0:
            raise ValueError(f"n must be a positive even integer, got {self.n}")
        if not (self.a > self.b >= 0):
            raise ValueError("need a > b >= 0")
        if self.a / self.n > 1:
            raise ValueError("a/n exceeds 1")
        if self.permutation is not None:
            perm = np.asarray(self.permutation)
            if sorted(perm.tolist()) != list(range(self.n)):
                raise ValueError("permutation must be a permutation of 0..n-1")

    @property
    def ground_truth(self) -> np.ndarray:
        """Labels in {1, 2}; first n/2 vertices are community 1 by default."""
        labels = np.where(np.arange(self.n) < self.n // 2, 1, 2)
        if self.permutation is not None:
            out = np.empty(self.n, dtype=int)
            out[np.asarray(self.permutation)] = labels
            return out
        return labels


class ProbabilityMatrix:
    """Symmetric matrix of edge probabilities p_ij in [0, 1].

    Stored either densely (n <= 10^4) or structurally as a two-block model
    (rates a/n within, b/n between, per-vertex labels); the structural form
    covers Erdős–Rényi as the degenerate case a == b.
    """

    def __init__(self, n, *, dense=None, a=None, b=None, labels=None):
        self.n = int(n)
        if dense is not None:
            dense = np.asarray(dense, dtype=np.float64)
            if dense.shape != (self.n, self.n):
                raise ValueError("dense entries must be n x n")
            if self.n > DENSE_LIMIT:
                raise ValueError(f"dense storage limited to n <= {DENSE_LIMIT}")
            if not np.allclose(dense, dense.T, atol=0):
                raise ValueError("probability matrix must be symmetric")
            if dense.min() < 0 or dense.max() > 1:
                raise ValueError("entries must lie in [0, 1]")
            self._dense = dense
            self._a = self._b = self._labels = None
        else:
            if a is None or b is None or labels is None:
                raise ValueError("structured form needs a, b and labels")
            if not (0 <= b <= a) or a / self.n > 1:
                raise ValueError("need 0 <= b <= a and a/n <= 1")
            labels = np.asarray(labels, dtype=np.int8)
            if labels.shape != (self.n,) or not np.isin(labels, [1, 2]).all():
                raise ValueError("labels must be a length-n vector over {1, 2}")
            self._dense = None
            self._a, self._b = float(a), float(b)
            self._labels = labels

    # ---- representation ----------------------------------------------------

    @property
    def structured(self) -> bool:
        return self._dense is None

    @property
    def block_rates(self):
        """(a, b, labels) for the structured form; None for dense storage."""
        if self._dense is not None:
            return None
        return self._a, self._b, self._labels

    def row(self, i: int) -> np.ndarray:
        if self._dense is not None:
            return self._dense[i]
        same = self._labels == self._labels[i]
        return np.where(same, self._a / self.n, self._b / self.n)

    def dense(self) -> np.ndarray:
        if self._dense is not None:
            return self._dense
        if self.n > DENSE_LIMIT:
            raise ValueError(f"refusing to densify beyond n = {DENSE_LIMIT}")
        same = self._labels[:, None] == self._labels[None, :]
        return np.where(same, self._a / self.n, self._b / self.n)

    # ---- exact parameter scans --------------------------------------------

    def column_sums(self) -> np.ndarray:
        """Expected degrees: exact column sums of (p_ij)."""
        if self._dense is not None:
            return self._dense.sum(axis=0)
        n1 = int(np.count_nonzero(self._labels == 1))
        n2 = self.n - n1
        own = np.where(self._labels == 1, n1, n2)
        other = self.n - own
        return (own * self._a + other * self._b) / self.n

    def max_entry(self) -> float:
        if self._dense is not None:
            return float(self._dense.max())
        return self._a / self.n

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """(p_ij) @ x in O(n) for structured form, O(n^2) for dense."""
        if self._dense is not None:
            return self._dense @ x
        s1 = float(x[self._labels == 1].sum())
        s2 = float(x[self._labels == 2].sum())
        own = np.where(self._labels == 1, s1, s2)
        return (own * self._a + (s1 + s2 - own) * self._b) / self.n


class SparseAdjacency:
    """Symmetric binary adjacency matrix with cached degrees.

    Loops are stored once on the diagonal and count +1 toward the degree
    d_i = sum_j A_ij.
    """

    def __init__(self, csr: sp.csr_matrix):
        csr = csr.tocsr()
        csr.sum_duplicates()
        if csr.shape[0] != csr.shape[1]:
            raise ValueError("adjacency must be square")
        if (csr != csr.T).nnz != 0:
            raise ValueError("adjacency must be symmetric")
        if csr.nnz and not np.all(csr.data == 1):
            raise ValueError("adjacency must be binary")
        self.csr = csr
        self.n = csr.shape[0]
        self.degrees = np.asarray(csr.sum(axis=1)).ravel().astype(np.int64)

    @classmethod
    def from_edges(cls, n, rows, cols) -> "SparseAdjacency":
        """Build from upper-triangular edge lists (i <= j), symmetrizing."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if np.any(rows > cols):
            raise ValueError("edges must satisfy i <= j")
        upper = sp.csr_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(n, n), dtype=np.float64
        )
        diag = sp.diags(upper.diagonal())
        return cls((upper + upper.T - diag).tocsr())

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.csr @ x

    def edge_list(self):
        """Upper-triangular edges as (i, j) pairs with i <= j."""
        coo = sp.triu(self.csr).tocoo()
        order = np.lexsort((coo.col, coo.row))
        return np.column_stack([coo.row[order], coo.col[order]])

    def write_edgelist(self, path):
        with open(path, "w") as fh:
            for i, j in self.edge_list():
                fh.write(f"{i} {j}\n")

    @classmethod
    def read_edgelist(cls, path, n) -> "SparseAdjacency":
        rows, cols = [], []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                i, j = map(int, line.split())
                rows.append(i)
                cols.append(j)
        return cls.from_edges(n, rows, cols)


def sbm_prob_matrix(cfg: SbmConfig) -> ProbabilityMatrix:
    """Expected adjacency of the balanced two-block model G(n, a/n, b/n)."""
    return ProbabilityMatrix(cfg.n, a=cfg.a, b=cfg.b, labels=cfg.ground_truth)


def er_prob_matrix(n: int, d: float) -> ProbabilityMatrix:
    """Erdős–Rényi G(n, d/n) as a degenerate one-rate block matrix."""
    if d < 0 or d / n > 1:
        raise ValueError("need 0 <= d/n <= 1")
    return ProbabilityMatrix(n, a=d, b=d, labels=np.ones(n, dtype=np.int8))


def _row_rng(seed: int, row: int) -> np.random.Generator:
    key = np.array(
        [seed & 0xFFFFFFFFFFFFFFFF, (row ^ 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))


def sample_graph(P: ProbabilityMatrix, seed: int) -> SparseAdjacency:
    """Sample independent Bernoulli(p_ij) on and above the diagonal.

    Each row of the upper triangle uses its own counter-based stream keyed by
    (seed, row), so the draw for entry (i, j) does not depend on how many
    edges earlier rows produced.
    """
    n = P.n
    rows, cols = [], []
    for i in range(n):
        p = P.row(i)[i:]
        u = _row_rng(seed, i).random(n - i)
        hits = np.nonzero(u < p)[0]
        if len(hits):
            rows.append(np.full(len(hits), i, dtype=np.int64))
            cols.append(hits + i)
    if rows:
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
    return SparseAdjacency.from_edges(n, rows, cols)


def model_params(P: ProbabilityMatrix) -> ModelParams:
    """Exact (d, d0, alpha) scans; rejects matrices with a zero column sum."""
    col = P.column_sums()
    d0 = float(col.min())
    if d0 <= 0:
        raise ValueError("zero expected column sum: d0 undefined")
    d = float(P.n * P.max_entry())
    return ModelParams(d=d, d0=d0, alpha=d / d0)


def read_sbm_config(path) -> tuple[SbmConfig, int]:
    """Plain-text key-value SBM config: keys n, a, b, seed, permutation."""
    values = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, raw = line.partition("=")
            values[key.strip()] = raw.strip()
    if not {"n", "a", "b"} <= values.keys():
        raise ValueError("config must define n, a and b")
    perm = None
    if "permutation" in values:
        perm = np.array([int(t) for t in values["permutation"].replace(",", " ").split()])
    cfg = SbmConfig(
        n=int(values["n"]), a=float(values["a"]), b=float(values["b"]), permutation=perm
    )
    return cfg, int(values.get("seed", 0))
