"""Pure-numpy versions of the hot kernels.

Same contracts as the compiled module; used when the extension is not built
or when REGLAP_PURE_PYTHON=1 is set.
"""
import numpy as np

_BATCH_BITS = 12


def inf_to_one_exact(B):
    """Exact ell_inf -> ell_1 norm, enumerating sign vectors on the rows.

    Enumerates half the sign cube in vectorized batches: for a batch of sign
    vectors X the candidate values are the row sums of |X @ B|.
    """
    B = np.ascontiguousarray(B, dtype=np.float64)
    m, k = B.shape
    if m == 0 or k == 0:
        return 0.0
    if m > 25:
        raise ValueError("enumeration limited to 25 rows")

    total = 1 << max(m - 1, 0)
    batch = min(total, 1 << _BATCH_BITS)
    bit_cols = np.arange(m - 1, dtype=np.uint64) if m > 1 else np.empty(0, dtype=np.uint64)
    best = 0.0
    for start in range(0, total, batch):
        codes = np.arange(start, min(start + batch, total), dtype=np.uint64)
        if m > 1:
            bits = (codes[:, None] >> bit_cols[None, :]) & 1
            X = np.empty((len(codes), m))
            X[:, : m - 1] = 1.0 - 2.0 * bits
            X[:, m - 1] = 1.0  # fixed sign; global flip is value-preserving
        else:
            X = np.ones((len(codes), 1))
        vals = np.abs(X @ B).sum(axis=1)
        best = max(best, float(vals.max()))
    return best


def jacobi_sweeps(S, V, tol, max_sweeps):
    """Cyclic Jacobi rotations on symmetric S, in place (numpy row/col ops)."""
    n = S.shape[0]
    fro = np.linalg.norm(S)
    if fro == 0.0:
        return 0
    for sweep in range(max_sweeps):
        off = np.linalg.norm(S - np.diag(np.diag(S)))
        if off <= tol * fro:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = S[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (S[q, q] - S[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(1.0, theta))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                cp = S[:, p].copy()
                cq = S[:, q].copy()
                S[:, p] = c * cp - s * cq
                S[:, q] = s * cp + c * cq
                rp = S[p, :].copy()
                rq = S[q, :].copy()
                S[p, :] = c * rp - s * rq
                S[q, :] = s * rp + c * rq
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    off = np.linalg.norm(S - np.diag(np.diag(S)))
    if off <= tol * fro:
        return max_sweeps
    return -1
