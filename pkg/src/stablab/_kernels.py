"""Hot GF(q) kernels: row reduction, batched rank, matrix product.

Every kernel has a numba implementation and a vectorized numpy
implementation.  Field arithmetic is table driven (``add``, ``mul``,
``neg``, ``inv`` are lookup arrays indexed by element codes ``0..q-1``), so
prime and prime-power fields share one code path.
"""
from __future__ import annotations

import numpy as np

from . import _accel
from ._accel import njit

# ----------------------------------------------------------------------
# numba versions


@njit(cache=True)
def _rref_nb(M, add, mul, neg, inv):
    R = M.copy()
    rows, cols = R.shape
    pivots = np.empty(min(rows, cols), dtype=np.int64)
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = -1
        for i in range(r, rows):
            if R[i, c] != 0:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for j in range(cols):
                tmp = R[r, j]
                R[r, j] = R[p, j]
                R[p, j] = tmp
        s = inv[R[r, c]]
        for j in range(cols):
            R[r, j] = mul[s, R[r, j]]
        for i in range(rows):
            if i != r and R[i, c] != 0:
                f = neg[R[i, c]]
                for j in range(cols):
                    R[i, j] = add[R[i, j], mul[f, R[r, j]]]
        pivots[r] = c
        r += 1
    return R, pivots[:r]


@njit(cache=True)
def _batch_rank_nb(stack, add, mul, neg, inv):
    n = stack.shape[0]
    out = np.empty(n, dtype=np.int64)
    for t in range(n):
        R, piv = _rref_nb(stack[t], add, mul, neg, inv)
        out[t] = piv.shape[0]
    return out


@njit(cache=True)
def _matmul_nb(A, B, add, mul):
    n, k = A.shape
    m = B.shape[1]
    C = np.zeros((n, m), dtype=A.dtype)
    for i in range(n):
        for l in range(k):
            a = A[i, l]
            if a == 0:
                continue
            for j in range(m):
                C[i, j] = add[C[i, j], mul[a, B[l, j]]]
    return C


# ----------------------------------------------------------------------
# numpy versions


def _rref_np(M, add, mul, neg, inv):
    R = np.array(M, dtype=np.int64, copy=True)
    rows, cols = R.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            R[[r, p]] = R[[p, r]]
        R[r] = mul[inv[R[r, c]], R[r]]
        f = neg[R[:, c]]
        f[r] = 0
        R = add[R, mul[f[:, None], R[r][None, :]]]
        pivots.append(c)
        r += 1
    return R, np.array(pivots, dtype=np.int64)


def _batch_rank_np(stack, add, mul, neg, inv):
    """Rank of every matrix in a 3-d stack, eliminating all matrices at once."""
    R = np.array(stack, dtype=np.int64, copy=True)
    n, rows, cols = R.shape
    rank = np.zeros(n, dtype=np.int64)
    idx = np.arange(n)
    for c in range(cols):
        live = rank < rows
        if not live.any():
            break
        # candidate pivot row: first nonzero entry at or below row `rank`
        below = np.arange(rows)[None, :] >= rank[:, None]
        cand = (R[:, :, c] != 0) & below & live[:, None]
        has = cand.any(axis=1)
        if not has.any():
            continue
        p = np.argmax(cand, axis=1)
        t = idx[has]
        pr, rr = p[has], rank[has]
        rows_p = R[t, pr].copy()
        R[t, pr] = R[t, rr]
        R[t, rr] = rows_p
        piv = R[t, rr, c]
        R[t, rr] = mul[inv[piv][:, None], R[t, rr]]
        f = neg[R[t, :, c]]
        f[np.arange(t.size), rr] = 0
        R[t] = add[R[t], mul[f[:, :, None], R[t, rr][:, None, :]]]
        rank[has] += 1
    return rank


def _matmul_np(A, B, add, mul):
    n, k = A.shape
    C = np.zeros((n, B.shape[1]), dtype=np.int64)
    for l in range(k):
        C = add[C, mul[A[:, l][:, None], B[l][None, :]]]
    return C


# ----------------------------------------------------------------------
# dispatch


def _backend(use_numba: bool | None) -> bool:
    return _accel.USE_NUMBA if use_numba is None else (use_numba and _accel.HAVE_NUMBA)


def rref(M, tables, use_numba: bool | None = None):
    add, mul, neg, inv = tables
    M = np.ascontiguousarray(M, dtype=np.int64)
    if M.size == 0:
        return M.copy(), np.zeros(0, dtype=np.int64)
    if _backend(use_numba):
        return _rref_nb(M, add, mul, neg, inv)
    return _rref_np(M, add, mul, neg, inv)


def batch_rank(stack, tables, use_numba: bool | None = None):
    add, mul, neg, inv = tables
    stack = np.ascontiguousarray(stack, dtype=np.int64)
    if stack.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    if stack.shape[1] == 0 or stack.shape[2] == 0:
        return np.zeros(stack.shape[0], dtype=np.int64)
    if _backend(use_numba):
        return _batch_rank_nb(stack, add, mul, neg, inv)
    return _batch_rank_np(stack, add, mul, neg, inv)


def matmul(A, B, tables, use_numba: bool | None = None):
    add, mul, _, _ = tables
    A = np.ascontiguousarray(A, dtype=np.int64)
    B = np.ascontiguousarray(B, dtype=np.int64)
    if A.shape[1] != B.shape[0]:
        raise ValueError(f"shape mismatch {A.shape} @ {B.shape}")
    if A.shape[1] == 0:
        return np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    if _backend(use_numba):
        return _matmul_nb(A, B, add, mul)
    return _matmul_np(A, B, add, mul)
