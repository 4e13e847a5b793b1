"""Degree-trimmed core extraction, greedy sparse row/column peeling of
residual blocks, entrywise restriction, and the residual norm bound formulas.
"""
from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .graph_model import ProbabilityMatrix, SparseAdjacency
from .oracles import spectral_norm_dense


@dataclass
class CoreSet:
    """Vertices whose degree stays within the trimming envelope."""

    J: np.ndarray           # kept vertices
    removed: np.ndarray     # trimmed vertices
    deviations: np.ndarray  # |d_j - E d_j| for every vertex
    threshold: float
    budget: float           # n/(2d) comparison value

    @property
    def removed_count(self) -> int:
        return len(self.removed)


def degree_trim_core(A: SparseAdjacency, P: ProbabilityMatrix, r: float,
                     constant: float = 30.0) -> CoreSet:
    """Keep vertices with |d_j - E d_j| <= constant * r * sqrt(d log d).

    The constant and the deviation form are parameters so experiments can
    tighten them; defaults follow the degree-concentration envelope.
    """
    if r < 1:
        raise ValueError("r must be at least 1")
    from .graph_model import model_params

    d = model_params(P).d
    expected = P.column_sums()
    dev = np.abs(A.degrees - expected)
    threshold = constant * r * math.sqrt(d * max(math.log(d), 0.0))
    keep = dev <= threshold
    return CoreSet(
        J=np.nonzero(keep)[0],
        removed=np.nonzero(~keep)[0],
        deviations=dev,
        threshold=threshold,
        budget=A.n / (2.0 * d),
    )


@dataclass
class IndexDecomposition:
    """Disjoint split of a block I x J into row-dominated and column-dominated
    index pair sets.

    R_lines / C_lines hold (line index, partner indices, ones at removal)
    per removed row / column; the pair sets are their disjoint union.
    """

    I: np.ndarray
    J: np.ndarray
    R_lines: list = field(default_factory=list)
    C_lines: list = field(default_factory=list)

    def pairs(self, which: str) -> np.ndarray:
        lines = self.R_lines if which == "R" else self.C_lines
        out = []
        for idx, partners, _ones in lines:
            partners = np.asarray(partners, dtype=np.int64)
            if which == "R":
                out.append(np.column_stack([np.full(len(partners), idx), partners]))
            else:
                out.append(np.column_stack([partners, np.full(len(partners), idx)]))
        if not out:
            return np.empty((0, 2), dtype=np.int64)
        return np.concatenate(out)

    @property
    def max_pairs_per_line(self) -> int:
        counts = [len(p) for _, p, _ in self.R_lines + self.C_lines]
        return max(counts, default=0)

    @property
    def max_ones_row_R(self) -> int:
        return max((ones for _, _, ones in self.R_lines), default=0)

    @property
    def max_ones_col_C(self) -> int:
        return max((ones for _, _, ones in self.C_lines), default=0)

    def to_json(self) -> str:
        return json.dumps(
            {"R": self.pairs("R").tolist(), "C": self.pairs("C").tolist()}
        )


def sparse_decompose(A: SparseAdjacency, I, J, threshold: int | None = None,
                     r: float = 1.0, d: float | None = None) -> IndexDecomposition:
    """Greedy peeling of the block I x J into R (removed rows) and C (removed
    columns).

    At each step the sparsest remaining line is removed: a row when at least
    as many rows as columns remain, a column otherwise; ties break on the
    lowest index.  The removed line's surviving index pairs go to R or C.
    The default sparsity threshold ceil(10 r log d) is only reported for
    comparison, never enforced; the greedy always terminates.
    """
    I = np.asarray(sorted(I), dtype=np.int64)
    J = np.asarray(sorted(J), dtype=np.int64)
    m, k = len(I), len(J)
    if threshold is None and d is not None:
        threshold = math.ceil(10.0 * r * math.log(d))

    sub = A.csr[I][:, J].tocsr()
    row_sets = [set(sub.indices[sub.indptr[i]:sub.indptr[i + 1]].tolist()) for i in range(m)]
    col_sets = [set() for _ in range(k)]
    for i in range(m):
        for c in row_sets[i]:
            col_sets[c].add(i)
    row_count = np.array([len(s) for s in row_sets])
    col_count = np.array([len(s) for s in col_sets])
    row_live = np.ones(m, dtype=bool)
    col_live = np.ones(k, dtype=bool)
    rows_left, cols_left = m, k

    # lazy min-heaps keyed by (ones count, index)
    row_heap = [(int(row_count[i]), i) for i in range(m)]
    col_heap = [(int(col_count[c]), c) for c in range(k)]
    heapq.heapify(row_heap)
    heapq.heapify(col_heap)

    decomp = IndexDecomposition(I=I, J=J)
    while rows_left > 0 or cols_left > 0:
        take_row = rows_left >= cols_left if cols_left > 0 else True
        if rows_left == 0:
            take_row = False
        if take_row:
            while True:
                cnt, i = heapq.heappop(row_heap)
                if row_live[i] and cnt == row_count[i]:
                    break
            row_live[i] = False
            rows_left -= 1
            partners = np.nonzero(col_live)[0]
            decomp.R_lines.append((int(I[i]), J[partners], int(row_count[i])))
            for c in row_sets[i]:
                if col_live[c]:
                    col_sets[c].discard(i)
                    col_count[c] -= 1
                    heapq.heappush(col_heap, (int(col_count[c]), c))
        else:
            while True:
                cnt, c = heapq.heappop(col_heap)
                if col_live[c] and cnt == col_count[c]:
                    break
            col_live[c] = False
            cols_left -= 1
            partners = np.nonzero(row_live)[0]
            decomp.C_lines.append((int(J[c]), I[partners], int(col_count[c])))
            for i in col_sets[c]:
                if row_live[i]:
                    row_sets[i].discard(c)
                    row_count[i] -= 1
                    heapq.heappush(row_heap, (int(row_count[i]), i))
    return decomp


def mask_from_pairs(n: int, pairs: np.ndarray) -> np.ndarray:
    mask = np.zeros((n, n), dtype=bool)
    if len(pairs):
        mask[pairs[:, 0], pairs[:, 1]] = True
    return mask


def restrict(M: np.ndarray, S) -> np.ndarray:
    """Entrywise mask: same entries as M on S, zero outside.

    S may be a boolean mask, an (N, 2) array of index pairs, or a block
    (rows, cols) tuple.
    """
    M = np.asarray(M, dtype=np.float64)
    n = M.shape[0]
    if isinstance(S, tuple):
        rows, cols = S
        mask = np.zeros_like(M, dtype=bool)
        mask[np.ix_(np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))] = True
    elif isinstance(S, np.ndarray) and S.dtype == bool:
        mask = S
    else:
        mask = mask_from_pairs(n, np.asarray(S, dtype=np.int64).reshape(-1, 2))
    return np.where(mask, M, 0.0)


def averaging_matrix(B: np.ndarray) -> np.ndarray:
    """L(B) = D^-1/2 B D^-1/2 with D the diagonal of row sums."""
    B = np.asarray(B, dtype=np.float64)
    rowsum = B.sum(axis=1)
    if np.any(rowsum <= 0):
        raise ValueError("B must have positive row sums")
    inv = 1.0 / np.sqrt(rowsum)
    return inv[:, None] * B * inv[None, :]


def restriction_bound_check(B: np.ndarray, S) -> tuple[float, float, bool]:
    """Check ||(L(B))_S|| <= sqrt(eps) with eps the worst row mass ratio.

    Returns (eps, lhs, holds); B must be symmetric with nonnegative entries
    and positive row sums.
    """
    B = np.asarray(B, dtype=np.float64)
    if not np.allclose(B, B.T):
        raise ValueError("B must be symmetric")
    if B.min() < 0:
        raise ValueError("B must have nonnegative entries")
    BS = restrict(B, S)
    rowsum = B.sum(axis=1)
    if np.any(rowsum <= 0):
        raise ValueError("B must have positive row sums")
    eps = float((BS.sum(axis=1) / rowsum).max())
    lhs = spectral_norm_dense(restrict(averaging_matrix(B), S))
    return eps, lhs, lhs <= math.sqrt(eps) + 1e-10


def residual_norm_bound(d: float, r: float, n: int, tau: float) -> float:
    """Closed-form bound 2/sqrt(d) + sqrt(40 r log d)/sqrt(n tau)."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    if d < math.e or r < 1:
        raise ValueError("need d >= e and r >= 1")
    return 2.0 / math.sqrt(d) + math.sqrt(40.0 * r * math.log(d)) / math.sqrt(n * tau)


def expected_residual_bound(d: float, n: int, tau: float) -> float:
    """Closed-form bound 2/sqrt(d) + 2/sqrt(n tau) for the expected matrix."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    return 2.0 / math.sqrt(d) + 2.0 / math.sqrt(n * tau)
