"""Dense exact linear algebra over Fraction / QuadNumber entries.

Matrices are lists of rows.  Every routine returns fresh lists and never
mutates its input.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .exact import sign, simplify

Matrix = list[list]


def _copy(M: Sequence[Sequence]) -> Matrix:
    return [[simplify(x) for x in row] for row in M]


def zeros(r: int, c: int) -> Matrix:
    return [[Fraction(0)] * c for _ in range(r)]


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def transpose(M: Sequence[Sequence]) -> Matrix:
    if not M:
        return []
    return [list(col) for col in zip(*M)]


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> Matrix:
    if A and B and len(A[0]) != len(B):
        raise ValueError(f"shape mismatch {len(A)}x{len(A[0])} @ {len(B)}x?")
    cols = len(B[0]) if B else 0
    out = zeros(len(A), cols)
    for i, row in enumerate(A):
        for k, a in enumerate(row):
            if a == 0:
                continue
            bk = B[k]
            for j in range(cols):
                out[i][j] = out[i][j] + a * bk[j]
    return [[simplify(x) for x in row] for row in out]


def matvec(A: Sequence[Sequence], v: Sequence) -> list:
    return [simplify(sum((a * x for a, x in zip(row, v)), Fraction(0))) for row in A]


def dot(u: Sequence, v: Sequence):
    return simplify(sum((a * b for a, b in zip(u, v)), Fraction(0)))


def rref(M: Sequence[Sequence]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    R = _copy(M)
    rows = len(R)
    cols = len(R[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = next((i for i in range(r, rows) if R[i][c] != 0), None)
        if p is None:
            continue
        R[r], R[p] = R[p], R[r]
        inv = 1 / R[r][c]
        R[r] = [simplify(x * inv) for x in R[r]]
        for i in range(rows):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                R[i] = [simplify(x - f * y) for x, y in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
    return R, pivots


def rank(M: Sequence[Sequence]) -> int:
    if not M or not M[0]:
        return 0
    return len(rref(M)[1])


def nullspace(M: Sequence[Sequence], ncols: int | None = None) -> Matrix:
    """Basis (list of vectors) of ``{x : M x = 0}``."""
    if not M:
        n = ncols or 0
        return identity(n)
    n = len(M[0])
    R, piv = rref(M)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for i, p in enumerate(piv):
            v[p] = simplify(-R[i][f])
        basis.append(v)
    return basis


def solve(A: Sequence[Sequence], b: Sequence) -> list:
    """Unique solution of ``A x = b``; raises on singular or inconsistent systems."""
    n = len(A[0]) if A else 0
    aug = [list(row) + [bi] for row, bi in zip(A, b)]
    R, piv = rref(aug)
    if n in piv:
        raise ValueError("inconsistent linear system")
    if len(piv) < n:
        raise ValueError("singular linear system")
    return [R[i][n] for i in range(n)]


def solve_any(A: Sequence[Sequence], b: Sequence) -> list | None:
    """Some solution of ``A x = b`` (free variables zero), or None."""
    n = len(A[0]) if A else 0
    aug = [list(row) + [bi] for row, bi in zip(A, b)]
    R, piv = rref(aug)
    if n in piv:
        return None
    x = [Fraction(0)] * n
    for i, p in enumerate(piv):
        x[p] = R[i][n]
    return x


def inverse(A: Sequence[Sequence]) -> Matrix:
    n = len(A)
    aug = [list(row) + e for row, e in zip(A, identity(n))]
    R, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise ValueError("singular matrix")
    return [row[n:] for row in R]


def det(A: Sequence[Sequence]):
    M = _copy(A)
    n = len(M)
    out = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if M[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            M[c], M[p] = M[p], M[c]
            out = -out
        out = out * M[c][c]
        for i in range(c + 1, n):
            if M[i][c] != 0:
                f = M[i][c] / M[c][c]
                M[i] = [simplify(x - f * y) for x, y in zip(M[i], M[c])]
    return simplify(out)


def signature(A: Sequence[Sequence]) -> tuple[int, int, int]:
    """Inertia ``(pos, neg, zero)`` of a symmetric matrix.

    Symmetric Gaussian reduction: pivot on a nonzero diagonal entry; when the
    remaining diagonal vanishes, the congruence ``e_i -> e_i + e_j`` on a
    nonzero off-diagonal entry produces one.
    """
    M = _copy(A)
    n = len(M)
    for i in range(n):
        for j in range(i):
            if M[i][j] != M[j][i]:
                raise ValueError("matrix is not symmetric")
    pos = neg = 0
    idx = list(range(n))
    while idx:
        k = next((i for i in idx if M[i][i] != 0), None)
        if k is None:
            pair = next(((i, j) for i in idx for j in idx if i < j and M[i][j] != 0), None)
            if pair is None:
                break
            i, j = pair
            # row/col i += row/col j
            for t in range(n):
                M[i][t] = M[i][t] + M[j][t]
            for t in range(n):
                M[t][i] = M[t][i] + M[t][j]
            k = i
        piv = M[k][k]
        if sign(piv) > 0:
            pos += 1
        else:
            neg += 1
        rest = [i for i in idx if i != k]
        for i in rest:
            if M[i][k] == 0:
                continue
            f = M[i][k] / piv
            for j in rest:
                M[i][j] = simplify(M[i][j] - f * M[k][j])
        for i in rest:
            M[i][k] = M[k][i] = Fraction(0)
        idx = rest
    return pos, neg, n - pos - neg
