"""Pure-numpy implementations of the two hot kernels.

Semantics here are the reference; the compiled module in ``_core.pyx``
mirrors them exactly and is preferred at import time when available.
"""

import numpy as np

IMPLEMENTATION = "fallback"

# run_simplex status codes, shared with the compiled kernel.
OPTIMAL = 0
UNBOUNDED = 1
ITERATION_LIMIT = 2


def run_simplex(T, basis, tol=1e-9, max_iter=10000):
    """Bland's-rule pivot loop on a dense maximization tableau, in place.

    ``T`` is (m+1) x (k+1): m constraint rows ``B^-1 A | B^-1 b`` with
    nonnegative right-hand sides, plus a bottom objective row holding the
    negated reduced costs (entry j is optimal when >= -tol) and the current
    objective value in its last cell.  ``basis[i]`` is the column basic in
    row i.  Returns OPTIMAL, UNBOUNDED, or ITERATION_LIMIT.
    """
    m = T.shape[0] - 1
    ncols = T.shape[1] - 1
    for _ in range(max_iter):
        obj = T[m, :ncols]
        candidates = np.nonzero(obj < -tol)[0]
        if candidates.size == 0:
            return OPTIMAL
        col = int(candidates[0])  # Bland: smallest eligible index

        pos = T[:m, col] > tol
        if not np.any(pos):
            return UNBOUNDED
        rows = np.nonzero(pos)[0]
        ratios = T[rows, ncols] / T[rows, col]
        best = np.min(ratios)
        # Bland tie-break: among minimal ratios, smallest basic variable.
        tied = rows[ratios <= best + tol * (1.0 + abs(best))]
        row = int(tied[np.argmin(basis[tied])])

        pivot = T[row, col]
        T[row, :] /= pivot
        colvals = T[:, col].copy()
        colvals[row] = 0.0
        T -= np.outer(colvals, T[row, :])
        T[:, col] = 0.0
        T[row, col] = 1.0
        basis[row] = col
    return ITERATION_LIMIT


def batch_affine_max(A, b, X):
    """max_k(A[k] . x + b[k]) and the first attaining k, for each row x of X.

    Returns (values, indices) with shapes (N,), (N,).
    """
    V = X @ A.T + b
    idx = np.argmax(V, axis=1)
    vals = V[np.arange(V.shape[0]), idx]
    return vals, idx.astype(np.int64)
