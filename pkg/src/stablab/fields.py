"""Matrix backends for representations: finite fields GF(q) and exact fields.

Both backends expose the same small surface (``rref``, ``rank``,
``matmul``, ``nullspace`` ...) over numpy arrays: ``int64`` element codes
for GF(q), ``object`` arrays of Fraction/QuadNumber for Q and Q(sqrt d).
"""
from __future__ import annotations

import functools
import itertools
from fractions import Fraction
from typing import Iterator

import numpy as np

from . import _kernels, linalg
from .exact import QQ, QuadExt, QuadNumber, Rationals, format_scalar, parse_scalar, simplify


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % k for k in range(2, int(p**0.5) + 1))


def _prime_power(q: int) -> tuple[int, int]:
    for p in range(2, q + 1):
        if q % p == 0:
            k, r = 0, q
            while r % p == 0:
                r //= p
                k += 1
            if r != 1 or not _is_prime(p):
                break
            return p, k
    raise ValueError(f"{q} is not a prime power")


def _polymulmod(a: list[int], b: list[int], mod: list[int], p: int) -> list[int]:
    k = len(mod) - 1
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            prod[i + j] = (prod[i + j] + x * y) % p
    for i in range(len(prod) - 1, k - 1, -1):
        c = prod[i]
        if c:
            for j in range(k + 1):
                prod[i - k + j] = (prod[i - k + j] - c * mod[j]) % p
    return (prod + [0] * k)[:k]


def _irreducible(p: int, k: int) -> list[int]:
    """Lexicographically first monic irreducible polynomial of degree k over F_p."""
    for tail in itertools.product(range(p), repeat=k):
        poly = list(tail) + [1]
        if poly[0] == 0:
            continue
        # no roots and no factors of degree <= k // 2: test by brute-force division
        ok = True
        for deg in range(1, k // 2 + 1):
            for ftail in itertools.product(range(p), repeat=deg):
                f = list(ftail) + [1]
                r = list(poly)
                for i in range(len(r) - 1, deg - 1, -1):
                    c = r[i]
                    if c:
                        for j in range(deg + 1):
                            r[i - deg + j] = (r[i - deg + j] - c * f[j]) % p
                if not any(r[:deg]):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return poly
    raise AssertionError("no irreducible polynomial found")


class GF:
    """The finite field with ``q`` elements, ``q`` a prime power ``<= 256``."""

    def __init__(self, q: int):
        if q > 256:
            raise ValueError("GF(q) supported for q <= 256")
        self.q = q
        self.p, self.k = _prime_power(q)
        self.add, self.mul, self.neg, self.inv = _tables(q)
        self.tables = (self.add, self.mul, self.neg, self.inv)
        self.name = f"F{q}"

    def __eq__(self, other):
        return isinstance(other, GF) and other.q == self.q

    def __hash__(self):
        return hash(("GF", self.q))

    def __repr__(self):
        return f"GF({self.q})"

    is_finite = True

    def to_json(self):
        return self.name

    # -- elements -------------------------------------------------------
    def elements(self) -> range:
        return range(self.q)

    def parse(self, s) -> int:
        v = int(s)
        if not 0 <= v < self.q:
            raise ValueError(f"{s!r} is not an element code of GF({self.q})")
        return v

    def format(self, x) -> str:
        return str(int(x))

    def random_matrix(self, rng: np.random.Generator, r: int, c: int) -> np.ndarray:
        return rng.integers(0, self.q, size=(r, c), dtype=np.int64)

    # -- matrices -------------------------------------------------------
    def array(self, rows) -> np.ndarray:
        a = np.array(rows, dtype=np.int64)
        if a.size and (a.min() < 0 or a.max() >= self.q):
            raise ValueError(f"entries outside GF({self.q})")
        return a

    def zeros(self, r: int, c: int) -> np.ndarray:
        return np.zeros((r, c), dtype=np.int64)

    def eye(self, n: int) -> np.ndarray:
        return np.eye(n, dtype=np.int64)

    def matmul(self, A, B) -> np.ndarray:
        return _kernels.matmul(A, B, self.tables)

    def add_m(self, A, B) -> np.ndarray:
        return self.add[A, B]

    def scale(self, c, A) -> np.ndarray:
        return self.mul[c, A]

    def sub_m(self, A, B) -> np.ndarray:
        return self.add[A, self.neg[B]]

    def rref(self, M):
        R, piv = _kernels.rref(M, self.tables)
        return R, [int(x) for x in piv]

    def rank(self, M) -> int:
        M = np.asarray(M)
        if M.size == 0:
            return 0
        return len(self.rref(M)[1])

    def batch_rank(self, stack) -> np.ndarray:
        return _kernels.batch_rank(stack, self.tables)

    def nullspace(self, M, ncols: int | None = None) -> np.ndarray:
        """Columns spanning ``{x : M x = 0}``."""
        M = np.asarray(M, dtype=np.int64)
        n = M.shape[1] if M.ndim == 2 and M.shape[0] else (ncols if ncols is not None else M.shape[1])
        if M.shape[0] == 0:
            return self.eye(n)
        R, piv = self.rref(M)
        free = [c for c in range(n) if c not in piv]
        out = self.zeros(n, len(free))
        for t, f in enumerate(free):
            out[f, t] = 1
            for i, pcol in enumerate(piv):
                out[pcol, t] = self.neg[R[i, f]]
        return out

    def is_zero(self, x) -> bool:
        return int(x) == 0

    def det_nonzero(self, M) -> bool:
        n = M.shape[0]
        return M.shape == (n, n) and self.rank(M) == n


@functools.lru_cache(maxsize=None)
def _tables(q: int):
    p, k = _prime_power(q)
    if k == 1:
        a = np.arange(p)
        add = (a[:, None] + a[None, :]) % p
        mul = (a[:, None] * a[None, :]) % p
    else:
        mod = _irreducible(p, k)
        digits = [[(x // p**i) % p for i in range(k)] for x in range(q)]

        def code(ds):
            return sum(d * p**i for i, d in enumerate(ds))

        add = np.array(
            [[code([(x + y) % p for x, y in zip(digits[u], digits[v])]) for v in range(q)] for u in range(q)]
        )
        mul = np.array(
            [[code(_polymulmod(digits[u], digits[v], mod, p)) for v in range(q)] for u in range(q)]
        )
    add = add.astype(np.int64)
    mul = mul.astype(np.int64)
    neg = np.array([int(np.flatnonzero(add[x] == 0)[0]) for x in range(q)], dtype=np.int64)
    inv = np.zeros(q, dtype=np.int64)
    for x in range(1, q):
        inv[x] = int(np.flatnonzero(mul[x] == 1)[0])
    for t in (add, mul, neg, inv):
        t.setflags(write=False)
    return add, mul, neg, inv


class ExactOps:
    """Matrix backend over Q or Q(sqrt d) using object arrays."""

    is_finite = False

    def __init__(self, field):
        self.field = field
        self.name = field.name

    def __eq__(self, other):
        return isinstance(other, ExactOps) and other.field == self.field

    def __hash__(self):
        return hash(("exact", self.field))

    def __repr__(self):
        return f"ExactOps({self.field.name})"

    def to_json(self):
        return self.field.to_json()

    def parse(self, s):
        return simplify(parse_scalar(s, self.field))

    def format(self, x) -> str:
        return format_scalar(simplify(x))

    def random_element(self, rng: np.random.Generator, span: int = 3):
        a = Fraction(int(rng.integers(-span, span + 1)))
        if isinstance(self.field, QuadExt) and rng.integers(0, 2):
            return QuadNumber(a, int(rng.integers(-span, span + 1)), self.field.d)
        return a

    def random_matrix(self, rng, r: int, c: int) -> np.ndarray:
        out = np.empty((r, c), dtype=object)
        for i in range(r):
            for j in range(c):
                out[i, j] = self.random_element(rng)
        return out

    def array(self, rows) -> np.ndarray:
        rows = [[self.parse(x) if isinstance(x, str) else simplify(self.field.coerce(x)) for x in row] for row in rows]
        a = np.empty((len(rows), len(rows[0]) if rows else 0), dtype=object)
        for i, row in enumerate(rows):
            for j, x in enumerate(row):
                a[i, j] = simplify(x)
        return a

    def zeros(self, r: int, c: int) -> np.ndarray:
        a = np.empty((r, c), dtype=object)
        a.fill(Fraction(0))
        return a

    def eye(self, n: int) -> np.ndarray:
        a = self.zeros(n, n)
        for i in range(n):
            a[i, i] = Fraction(1)
        return a

    @staticmethod
    def _wrap(rows, r: int, c: int) -> np.ndarray:
        a = np.empty((r, c), dtype=object)
        for i in range(r):
            for j in range(c):
                a[i, j] = simplify(rows[i][j])
        return a

    def matmul(self, A, B) -> np.ndarray:
        if A.shape[1] != B.shape[0]:
            raise ValueError(f"shape mismatch {A.shape} @ {B.shape}")
        if A.shape[1] == 0:
            return self.zeros(A.shape[0], B.shape[1])
        return self._wrap(linalg.matmul(A.tolist(), B.tolist()), A.shape[0], B.shape[1])

    def add_m(self, A, B):
        return self._wrap((A + B).tolist(), *A.shape)

    def sub_m(self, A, B):
        return self._wrap((A - B).tolist(), *A.shape)

    def scale(self, c, A):
        return self._wrap((A * c).tolist(), *A.shape)

    def rref(self, M):
        M = np.asarray(M, dtype=object)
        if M.size == 0:
            return M.copy(), []
        R, piv = linalg.rref(M.tolist())
        return self._wrap(R, *M.shape), piv

    def rank(self, M) -> int:
        M = np.asarray(M, dtype=object)
        if M.size == 0:
            return 0
        return len(self.rref(M)[1])

    def batch_rank(self, stack) -> np.ndarray:
        return np.array([self.rank(m) for m in stack], dtype=np.int64)

    def nullspace(self, M, ncols: int | None = None) -> np.ndarray:
        M = np.asarray(M, dtype=object)
        n = M.shape[1] if M.ndim == 2 else ncols
        if M.shape[0] == 0:
            return self.eye(n)
        basis = linalg.nullspace(M.tolist())
        out = self.zeros(n, len(basis))
        for t, v in enumerate(basis):
            for i in range(n):
                out[i, t] = v[i]
        return out

    def is_zero(self, x) -> bool:
        return x == 0

    def det_nonzero(self, M) -> bool:
        n = M.shape[0]
        return M.shape == (n, n) and self.rank(M) == n


def field_ops(desc) -> GF | ExactOps:
    """Backend from a JSON field descriptor: ``"F2"``, ``"F9"``, ``"Q"``, ``{"quad": 2}``."""
    if isinstance(desc, (GF, ExactOps)):
        return desc
    if isinstance(desc, (Rationals, QuadExt)):
        return ExactOps(desc)
    if isinstance(desc, str) and desc.upper().startswith("F") and desc[1:].isdigit():
        return GF(int(desc[1:]))
    if desc in ("Q", "QQ"):
        return ExactOps(QQ)
    if isinstance(desc, dict) and "quad" in desc:
        return ExactOps(QuadExt(int(desc["quad"])))
    raise ValueError(f"unknown field descriptor {desc!r}")


# ----------------------------------------------------------------------
# subspace enumeration over GF(q)


def gaussian_binomial(n: int, k: int, q: int) -> int:
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def subspace_count(n: int, q: int) -> int:
    return sum(gaussian_binomial(n, k, q) for k in range(n + 1))


def _echelon_forms(n: int, k: int, q: int) -> Iterator[np.ndarray]:
    for piv in itertools.combinations(range(n), k):
        free = [(i, c) for i, p in enumerate(piv) for c in range(p + 1, n) if c not in piv]
        for vals in itertools.product(range(q), repeat=len(free)):
            R = np.zeros((k, n), dtype=np.int64)
            for i, p in enumerate(piv):
                R[i, p] = 1
            for (i, c), v in zip(free, vals):
                R[i, c] = v
            yield R


@functools.lru_cache(maxsize=64)
def all_subspaces(n: int, q: int) -> tuple[np.ndarray, ...]:
    """Every subspace of GF(q)^n as a column basis (n x k) in reduced echelon form.

    Ordered by dimension, then lexicographically by pivot set and entries.
    """
    out = []
    for k in range(n + 1):
        for R in _echelon_forms(n, k, q):
            B = np.ascontiguousarray(R.T)
            B.setflags(write=False)
            out.append(B)
    return tuple(out)
