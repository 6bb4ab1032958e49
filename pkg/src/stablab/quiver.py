"""King stability for representations of the two-layer quiver.

The quiver has vertices ``v_1..v_j0`` and ``w_1..w_j0`` and ``h[i][j]``
arrows ``v_i -> w_j``.  A representation stores, for every pair ``(i, j)``,
``h[i][j]`` matrices of shape ``dim W_j x dim V_i``.  A submodule is a choice
of subspaces ``V'_i``, ``W'_j`` with every arrow mapping ``V'_i`` into
``W'_j``.

For a fixed V-part the smallest admissible W-part is
``Wmin_j = sum_i sum_k phi_ij^k (V'_i)``, and since ``theta_{j2} <= 0`` it
maximizes ``theta`` among submodules with that V-part.  Exhaustive checks over
GF(q) therefore enumerate V-parts only.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

import numpy as np

from .exact import format_scalar, sign, simplify
from .fields import GF, ExactOps, all_subspaces, field_ops, subspace_count
from .poly import poly_eval
from .sheaf import SheafClass, StabilityParameter, as_sigma

DEFAULT_CAP = 1_000_000


class CapExceeded(RuntimeError):
    """An exhaustive enumeration would exceed the configured cap."""


class NotSemistable(ValueError):
    """The operation needs a semistable representation."""


# ----------------------------------------------------------------------
# basic types


@dataclass(frozen=True)
class QuiverSpec:
    j0: int
    h: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        h = tuple(tuple(int(x) for x in row) for row in self.h)
        if self.j0 < 1 or len(h) != self.j0 or any(len(r) != self.j0 for r in h):
            raise ValueError("h must be a j0 x j0 matrix")
        if any(x < 0 for r in h for x in r):
            raise ValueError("arrow counts must be non-negative")
        if not any(x > 0 for r in h for x in r):
            raise ValueError("the quiver needs at least one arrow")
        object.__setattr__(self, "h", h)

    def arrows(self) -> Iterator[tuple[int, int, int]]:
        for i in range(self.j0):
            for j in range(self.j0):
                for k in range(self.h[i][j]):
                    yield i, j, k


@dataclass(frozen=True)
class DimVector:
    """``(d_11, d_12, ..., d_j0,1, d_j0,2)``: V-dimension then W-dimension per index."""

    d: tuple[int, ...]

    def __post_init__(self):
        d = tuple(int(x) for x in self.d)
        if len(d) % 2 or not d:
            raise ValueError("dimension vector needs an even, positive length")
        if any(x < 0 for x in d):
            raise ValueError("dimensions must be non-negative")
        object.__setattr__(self, "d", d)

    @classmethod
    def from_parts(cls, v: Sequence[int], w: Sequence[int]) -> DimVector:
        return cls(tuple(x for pair in zip(v, w) for x in pair))

    @property
    def j0(self) -> int:
        return len(self.d) // 2

    @property
    def v(self) -> tuple[int, ...]:
        return self.d[0::2]

    @property
    def w(self) -> tuple[int, ...]:
        return self.d[1::2]

    def __iter__(self):
        return iter(self.d)

    def __len__(self):
        return len(self.d)

    def to_json(self) -> list[int]:
        return list(self.d)


def _dims(x) -> DimVector:
    return x if isinstance(x, DimVector) else DimVector(tuple(x))


@dataclass(frozen=True, eq=False)
class Representation:
    ops: object
    quiver: QuiverSpec
    dims: DimVector
    maps: tuple  # maps[i][j] = tuple of arrays (w_j x v_i)
    label: str = ""

    def __post_init__(self):
        q, d = self.quiver, self.dims
        if d.j0 != q.j0:
            raise ValueError(f"dimension vector has j0={d.j0}, quiver has j0={q.j0}")
        maps = []
        for i in range(q.j0):
            row = []
            for j in range(q.j0):
                mats = tuple(self.maps[i][j])
                if len(mats) != q.h[i][j]:
                    raise ValueError(f"arrow ({i + 1},{j + 1}) needs {q.h[i][j]} matrices, got {len(mats)}")
                fixed = []
                for A in mats:
                    A = np.asarray(A, dtype=object if isinstance(self.ops, ExactOps) else np.int64)
                    if A.shape != (d.w[j], d.v[i]):
                        raise ValueError(
                            f"arrow ({i + 1},{j + 1}) matrix has shape {A.shape}, expected {(d.w[j], d.v[i])}"
                        )
                    A = A.copy()
                    A.setflags(write=False)
                    fixed.append(A)
                row.append(tuple(fixed))
            maps.append(tuple(row))
        object.__setattr__(self, "maps", tuple(maps))

    @property
    def j0(self) -> int:
        return self.quiver.j0

    @property
    def finite(self) -> bool:
        return isinstance(self.ops, GF)

    def stacked(self, i: int) -> np.ndarray:
        """All arrow matrices out of ``v_i`` stacked vertically."""
        blocks = [A for j in range(self.j0) for A in self.maps[i][j]]
        if not blocks:
            return self.ops.zeros(0, self.dims.v[i])
        return np.vstack(blocks)

    def to_json(self) -> dict:
        f = self.ops.format
        return {
            "label": self.label,
            "field": self.ops.to_json(),
            "j0": self.j0,
            "h": [list(r) for r in self.quiver.h],
            "dims": self.dims.to_json(),
            "maps": [
                [[[[f(x) for x in row] for row in A.tolist()] for A in self.maps[i][j]] for j in range(self.j0)]
                for i in range(self.j0)
            ],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> Representation:
        ops = field_ops(obj["field"])
        quiver = QuiverSpec(int(obj["j0"]), tuple(tuple(r) for r in obj["h"]))
        dims = DimVector(tuple(obj["dims"]))
        maps = []
        for i in range(quiver.j0):
            row = []
            for j in range(quiver.j0):
                mats = []
                for A in obj["maps"][i][j]:
                    if not A or not A[0]:
                        mats.append(ops.zeros(dims.w[j], dims.v[i]))
                    else:
                        mats.append(ops.array([[ops.parse(x) for x in r] for r in A]))
                row.append(mats)
            maps.append(row)
        return cls(ops, quiver, dims, maps, str(obj.get("label", "")))


def random_representation(
    ops, quiver: QuiverSpec, dims, rng: np.random.Generator, label: str = ""
) -> Representation:
    dims = _dims(dims)
    maps = [
        [[ops.random_matrix(rng, dims.w[j], dims.v[i]) for _ in range(quiver.h[i][j])] for j in range(quiver.j0)]
        for i in range(quiver.j0)
    ]
    return Representation(ops, quiver, dims, maps, label)


def direct_sum(a: Representation, b: Representation, label: str = "") -> Representation:
    if a.quiver != b.quiver or a.ops != b.ops:
        raise ValueError("direct sum needs the same quiver and field")
    ops = a.ops
    dims = DimVector.from_parts(
        [x + y for x, y in zip(a.dims.v, b.dims.v)], [x + y for x, y in zip(a.dims.w, b.dims.w)]
    )
    maps = []
    for i in range(a.j0):
        row = []
        for j in range(a.j0):
            mats = []
            for A, B in zip(a.maps[i][j], b.maps[i][j]):
                M = ops.zeros(dims.w[j], dims.v[i])
                M[: A.shape[0], : A.shape[1]] = A
                M[A.shape[0]:, A.shape[1]:] = B
                mats.append(M)
            row.append(mats)
        maps.append(row)
    return Representation(ops, a.quiver, dims, maps, label)


# ----------------------------------------------------------------------
# subspaces (columns span the subspace)


def col_basis(ops, M: np.ndarray, n: int | None = None) -> np.ndarray:
    """Canonical basis of the column span (transpose of a reduced echelon form)."""
    n = M.shape[0] if n is None else n
    if M.size == 0:
        return ops.zeros(n, 0)
    R, piv = ops.rref(np.ascontiguousarray(M.T))
    B = np.ascontiguousarray(R[: len(piv)].T)
    return B


def _hstack(ops, n: int, mats: Sequence[np.ndarray]) -> np.ndarray:
    mats = [m for m in mats if m.shape[1]]
    if not mats:
        return ops.zeros(n, 0)
    return np.hstack(mats)


def span_sum(ops, n: int, mats: Sequence[np.ndarray]) -> np.ndarray:
    return col_basis(ops, _hstack(ops, n, mats), n)


def contains(ops, A: np.ndarray, B: np.ndarray) -> bool:
    """Whether ``span B`` lies in ``span A``."""
    if B.shape[1] == 0:
        return True
    n = A.shape[0]
    return ops.rank(_hstack(ops, n, [A, B])) == (ops.rank(A) if A.shape[1] else 0)


def annihilator(ops, B: np.ndarray, n: int) -> np.ndarray:
    """Rows ``P`` with ``P x = 0`` exactly for ``x`` in ``span B``."""
    if B.shape[1] == 0:
        return ops.eye(n)
    N = ops.nullspace(np.ascontiguousarray(B.T), n)
    return np.ascontiguousarray(N.T)


def same_space(ops, A: np.ndarray, B: np.ndarray) -> bool:
    return A.shape == B.shape and np.array_equal(col_basis(ops, A), col_basis(ops, B))


# ----------------------------------------------------------------------
# submodules


@dataclass(frozen=True, eq=False)
class SubmoduleWitness:
    V: tuple
    W: tuple

    @property
    def dims(self) -> DimVector:
        return DimVector.from_parts([b.shape[1] for b in self.V], [b.shape[1] for b in self.W])

    def key(self) -> tuple:
        return tuple(tuple(map(tuple, np.asarray(b).T.tolist())) for b in self.V + self.W)

    def __eq__(self, other):
        return isinstance(other, SubmoduleWitness) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def to_json(self, ops) -> dict:
        def enc(b):
            return [[ops.format(x) for x in col] for col in np.asarray(b).T.tolist()]

        return {"dims": self.dims.to_json(), "V": [enc(b) for b in self.V], "W": [enc(b) for b in self.W]}


def make_submodule(rep: Representation, V: Sequence, W: Sequence) -> SubmoduleWitness:
    ops = rep.ops
    Vb = tuple(col_basis(ops, np.asarray(b), rep.dims.v[i]) for i, b in enumerate(V))
    Wb = tuple(col_basis(ops, np.asarray(b), rep.dims.w[j]) for j, b in enumerate(W))
    return SubmoduleWitness(Vb, Wb)


def is_submodule(rep: Representation, sub: SubmoduleWitness) -> bool:
    ops = rep.ops
    for i, j, k in rep.quiver.arrows():
        img = ops.matmul(rep.maps[i][j][k], sub.V[i]) if sub.V[i].shape[1] else ops.zeros(rep.dims.w[j], 0)
        if not contains(ops, sub.W[j], img):
            return False
    return True


def zero_submodule(rep: Representation) -> SubmoduleWitness:
    ops = rep.ops
    return SubmoduleWitness(
        tuple(ops.zeros(n, 0) for n in rep.dims.v), tuple(ops.zeros(n, 0) for n in rep.dims.w)
    )


def full_submodule(rep: Representation) -> SubmoduleWitness:
    ops = rep.ops
    return SubmoduleWitness(tuple(ops.eye(n) for n in rep.dims.v), tuple(ops.eye(n) for n in rep.dims.w))


def is_proper(rep: Representation, sub: SubmoduleWitness) -> bool:
    return tuple(sub.dims) != tuple(rep.dims)


def image_span(rep: Representation, j: int, V: Sequence[np.ndarray]) -> np.ndarray:
    """``sum_i sum_k phi_ij^k (V_i)``."""
    ops = rep.ops
    parts = [
        ops.matmul(A, V[i]) for i in range(rep.j0) if V[i].shape[1] for A in rep.maps[i][j]
    ]
    return span_sum(ops, rep.dims.w[j], parts)


def preimage(rep: Representation, i: int, W: Sequence[np.ndarray]) -> np.ndarray:
    """``{v in V_i : phi_ij^k v in W_j for all j, k}``."""
    ops = rep.ops
    rows = []
    for j in range(rep.j0):
        if not rep.maps[i][j]:
            continue
        P = annihilator(ops, W[j], rep.dims.w[j])
        if P.shape[0] == 0:
            continue
        rows.extend(ops.matmul(P, A) for A in rep.maps[i][j])
    n = rep.dims.v[i]
    if not rows:
        return ops.eye(n)
    return col_basis(ops, ops.nullspace(np.vstack(rows), n), n)


def tight_closure(rep: Representation, seeds: Sequence[np.ndarray]) -> SubmoduleWitness:
    """Submodule ``(V', W')`` with ``W' = sum phi(seeds)`` and ``V'`` its full preimage."""
    ops = rep.ops
    if len(seeds) != rep.j0:
        raise ValueError(f"need {rep.j0} seed subspaces")
    S = []
    for i, s in enumerate(seeds):
        s = np.asarray(s, dtype=object if isinstance(ops, ExactOps) else np.int64)
        if s.ndim != 2 or s.shape[0] != rep.dims.v[i]:
            raise ValueError(f"seed {i + 1} must have {rep.dims.v[i]} rows")
        S.append(col_basis(ops, s, rep.dims.v[i]))
    W = tuple(image_span(rep, j, S) for j in range(rep.j0))
    V = tuple(preimage(rep, i, W) for i in range(rep.j0))
    return SubmoduleWitness(V, W)


# ----------------------------------------------------------------------
# theta and slope


class _Infinity:
    """The slope value of a module with zero weighted W-dimension."""

    def __repr__(self):
        return "inf"

    def __str__(self):
        return "inf"

    def _cmp(self, other):
        return 0 if other is INF else 1

    def __eq__(self, other):
        return other is INF

    def __hash__(self):
        return hash("stablab-inf")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is INF

    def __gt__(self, other):
        return other is not INF

    def __ge__(self, other):
        return True


INF = _Infinity()


def format_slope(x) -> str:
    return "inf" if x is INF else format_scalar(x)


def _wsum(sigma, xs) -> object:
    return simplify(sum((s * x for s, x in zip(sigma, xs)), Fraction(0)))


def theta_vector(sigma, d) -> tuple:
    """``theta_{j1} = sigma_j / sum sigma d_{i1}``, ``theta_{j2} = -sigma_j / sum sigma d_{i2}``."""
    sigma, d = as_sigma(sigma), _dims(d)
    if len(sigma) != d.j0:
        raise ValueError(f"sigma has {len(sigma)} entries, dimension vector has j0={d.j0}")
    D1, D2 = _wsum(sigma, d.v), _wsum(sigma, d.w)
    if sign(D1) == 0 or sign(D2) == 0:
        raise ValueError("theta needs sum sigma_i d_i1 > 0 and sum sigma_i d_i2 > 0")
    out = []
    for s in sigma:
        out.append(simplify(s / D1))
        out.append(simplify(-s / D2))
    return tuple(out)


def theta_of(subdims, theta: Sequence) -> object:
    subdims = _dims(subdims)
    return simplify(sum((t * x for t, x in zip(theta, subdims)), Fraction(0)))


def slope_mu(sigma, subdims):
    """``sum sigma dim V' / sum sigma dim W'``; ``INF`` for zero denominator."""
    sigma, subdims = as_sigma(sigma), _dims(subdims)
    num, den = _wsum(sigma, subdims.v), _wsum(sigma, subdims.w)
    if sign(den) == 0:
        if sign(num) == 0:
            raise ValueError("slope undefined: both weighted sums vanish")
        return INF
    return simplify(num / den)


def is_degenerate(subdims, sigma) -> bool:
    sigma, subdims = as_sigma(sigma), _dims(subdims)
    if any(subdims.v):
        return False
    return all(w == 0 for w, s in zip(subdims.w, sigma) if sign(s) != 0)


def character_of(sigma, d) -> tuple:
    """Exponents of ``chi_theta``: the negated theta vector."""
    return tuple(simplify(-t) for t in theta_vector(sigma, d))


def expected_dimvec(E: SheafClass, n: int, m: int) -> DimVector:
    """``(P_1(n), P_1(m), ..., P_j0(n), P_j0(m))``."""
    if not m > n:
        raise ValueError("need m > n")
    out = []
    for j in range(E.j0):
        P = E.hilbert(j)
        for t in (n, m):
            val = poly_eval(P, t)
            if not isinstance(val, Fraction) or val.denominator != 1 or val <= 0:
                raise ValueError(f"P_{j + 1}({t}) = {format_scalar(val)} is not a positive integer; n, m too small")
            out.append(int(val))
    return DimVector(tuple(out))


def is_generated_type(rep: Representation) -> bool:
    """Every nonzero ``v`` in every ``V_i`` has some nonzero arrow image."""
    return all(rep.ops.rank(rep.stacked(i)) == rep.dims.v[i] if rep.dims.v[i] else True for i in range(rep.j0))


# ----------------------------------------------------------------------
# exhaustive tables over GF(q)


@dataclass
class _Tables:
    subsV: list
    subsW: list
    dimV: list  # arrays of subspace dimensions
    dimW: list
    compat: list  # compat[i][j]: bool array (nV_i, nW_j) or None when no arrows


def _check_cap(rep: Representation, cap: int) -> int:
    q = rep.ops.q
    n = math.prod(subspace_count(v, q) for v in rep.dims.v)
    if n > cap:
        raise CapExceeded(f"{n} V-subspace tuples exceed the cap {cap}")
    return n


def _compat_table(rep: Representation, i: int, j: int, SV, SW) -> np.ndarray:
    ops = rep.ops
    mats = rep.maps[i][j]
    w = rep.dims.w[j]
    nS, nT = len(SV), len(SW)
    if w == 0:
        return np.ones((nS, nT), dtype=bool)
    # image of each subspace, padded to a common width
    h, v = len(mats), rep.dims.v[i]
    width_img = h * v
    width_T = w
    stack = np.zeros((nS * nT, w, width_T + width_img), dtype=np.int64)
    imgs = []
    for S in SV:
        if S.shape[1]:
            img = np.hstack([ops.matmul(A, S) for A in mats])
        else:
            img = np.zeros((w, 0), dtype=np.int64)
        imgs.append(img)
    for s, img in enumerate(imgs):
        for t, T in enumerate(SW):
            blk = stack[s * nT + t]
            blk[:, : T.shape[1]] = T
            blk[:, width_T: width_T + img.shape[1]] = img
    ranks = ops.batch_rank(stack).reshape(nS, nT)
    dimT = np.array([T.shape[1] for T in SW])
    return ranks == dimT[None, :]


def _tables(rep: Representation) -> _Tables:
    cached = getattr(rep, "_stablab_tables", None)
    if cached is not None:
        return cached
    q = rep.ops.q
    subsV = [all_subspaces(v, q) for v in rep.dims.v]
    subsW = [all_subspaces(w, q) for w in rep.dims.w]
    compat = [
        [_compat_table(rep, i, j, subsV[i], subsW[j]) if rep.quiver.h[i][j] else None for j in range(rep.j0)]
        for i in range(rep.j0)
    ]
    t = _Tables(
        subsV,
        subsW,
        [np.array([S.shape[1] for S in s]) for s in subsV],
        [np.array([T.shape[1] for T in s]) for s in subsW],
        compat,
    )
    object.__setattr__(rep, "_stablab_tables", t)
    return t


def _tuple_chunks(sizes: Sequence[int], chunk: int = 1 << 15):
    total = math.prod(sizes)
    for start in range(0, total, chunk):
        flat = np.arange(start, min(total, start + chunk))
        yield np.stack(np.unravel_index(flat, sizes), axis=1) if sizes else np.zeros((len(flat), 0), dtype=np.int64)


def _allowed_W(rep: Representation, tab: _Tables, idx: np.ndarray, j: int, mask: np.ndarray | None = None):
    allowed = np.ones((idx.shape[0], len(tab.subsW[j])), dtype=bool)
    for i in range(rep.j0):
        c = tab.compat[i][j]
        if c is not None:
            allowed &= c[idx[:, i]]
    if mask is not None:
        allowed &= mask[None, :]
    return allowed


def _minimal_W(rep, tab, idx, masks=None) -> np.ndarray:
    """Index of the smallest admissible W-subspace per tuple (subspaces are sorted by dimension)."""
    cols = []
    for j in range(rep.j0):
        allowed = _allowed_W(rep, tab, idx, j, None if masks is None else masks[j])
        if not allowed.any(axis=1).all():
            raise AssertionError("no admissible W-subspace; the full space must always qualify")
        cols.append(allowed.argmax(axis=1))
    return np.stack(cols, axis=1)


def _witness(tab: _Tables, s_idx, t_idx) -> SubmoduleWitness:
    return SubmoduleWitness(
        tuple(tab.subsV[i][s] for i, s in enumerate(s_idx)), tuple(tab.subsW[j][t] for j, t in enumerate(t_idx))
    )


def minimal_submodules(rep: Representation, cap: int = DEFAULT_CAP, containing: SubmoduleWitness | None = None):
    """Every V-part (optionally containing a given submodule) with its smallest W-part.

    Yields ``(s_idx, t_idx, dims)`` as integer arrays for all tuples.
    """
    if not rep.finite:
        raise ValueError("exhaustive enumeration needs a finite field")
    _check_cap(rep, cap)
    tab = _tables(rep)
    ops = rep.ops
    vmasks = wmasks = None
    if containing is not None:
        vmasks = [np.array([contains(ops, S, containing.V[i]) for S in tab.subsV[i]]) for i in range(rep.j0)]
        wmasks = [np.array([contains(ops, T, containing.W[j]) for T in tab.subsW[j]]) for j in range(rep.j0)]
    choices = [np.flatnonzero(vmasks[i]) if vmasks else np.arange(len(tab.subsV[i])) for i in range(rep.j0)]
    sizes = [len(c) for c in choices]
    out_s, out_t = [], []
    for local in _tuple_chunks(sizes):
        idx = np.stack([choices[i][local[:, i]] for i in range(rep.j0)], axis=1)
        out_s.append(idx)
        out_t.append(_minimal_W(rep, tab, idx, wmasks))
    S = np.concatenate(out_s) if out_s else np.zeros((0, rep.j0), dtype=np.int64)
    T = np.concatenate(out_t) if out_t else np.zeros((0, rep.j0), dtype=np.int64)
    vd = np.stack([tab.dimV[i][S[:, i]] for i in range(rep.j0)], axis=1)
    wd = np.stack([tab.dimW[j][T[:, j]] for j in range(rep.j0)], axis=1)
    dims = np.empty((len(S), 2 * rep.j0), dtype=np.int64)
    dims[:, 0::2] = vd
    dims[:, 1::2] = wd
    return S, T, dims, tab


def all_submodules(rep: Representation, cap: int = DEFAULT_CAP) -> Iterator[SubmoduleWitness]:
    """Every submodule (all V-parts, all admissible W-parts); an oracle for small cases."""
    if not rep.finite:
        raise ValueError("exhaustive enumeration needs a finite field")
    _check_cap(rep, cap)
    tab = _tables(rep)
    count = 0
    for s_idx in itertools.product(*[range(len(s)) for s in tab.subsV]):
        idx = np.array([s_idx])
        options = [np.flatnonzero(_allowed_W(rep, tab, idx, j)[0]) for j in range(rep.j0)]
        for t_idx in itertools.product(*options):
            count += 1
            if count > cap:
                raise CapExceeded(f"more than {cap} submodules")
            yield _witness(tab, s_idx, t_idx)


def tight_submodules(rep: Representation, cap: int = DEFAULT_CAP) -> list[SubmoduleWitness]:
    """Tight closures of every V-seed tuple, deduplicated."""
    S, T, _, tab = minimal_submodules(rep, cap)
    seen = {}
    for t_row in map(tuple, T.tolist()):
        if t_row in seen:
            continue
        # largest V-subspace mapping into the given W-part, per vertex
        V_idx = []
        for i in range(rep.j0):
            ok = np.ones(len(tab.subsV[i]), dtype=bool)
            for j in range(rep.j0):
                c = tab.compat[i][j]
                if c is not None:
                    ok &= c[:, t_row[j]]
            cand = np.flatnonzero(ok)
            V_idx.append(int(cand[np.argmax(tab.dimV[i][cand])]))
        seen[t_row] = _witness(tab, V_idx, t_row)
    return list(seen.values())


# ----------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class QuiverVerdict:
    kind: str  # "Stable" | "Semistable" | "Unstable" | "NoDestabilizerFound"
    witness: SubmoduleWitness | None = None
    destabilizers: tuple = ()
    trials: int = 0
    max_theta: object = None
    definitive: bool = True

    @property
    def semistable(self) -> bool:
        return self.kind in ("Stable", "Semistable")

    def to_json(self, ops) -> dict:
        out = {"verdict": self.kind, "definitive": self.definitive}
        if self.max_theta is not None:
            out["max_theta"] = format_scalar(self.max_theta)
        if self.witness is not None:
            out["witness"] = self.witness.to_json(ops)
        if self.destabilizers:
            out["destabilizers"] = [d.to_json(ops) for d in self.destabilizers]
        if self.kind == "NoDestabilizerFound":
            out["trials"] = self.trials
        return out


@dataclass
class _Profile:
    S: np.ndarray
    T: np.ndarray
    dims: np.ndarray
    tab: _Tables
    uniq: np.ndarray
    first: np.ndarray


def _profile(rep: Representation, cap: int) -> _Profile:
    """Minimal submodules and their distinct dimension vectors (independent of sigma)."""
    cached = getattr(rep, "_stablab_profile", None)
    if cached is not None:
        return cached
    S, T, dims, tab = minimal_submodules(rep, cap)
    uniq, first = np.unique(dims, axis=0, return_index=True)
    p = _Profile(S, T, dims, tab, uniq, first)
    object.__setattr__(rep, "_stablab_profile", p)
    return p


def submodule_dimvecs(rep: Representation, cap: int = DEFAULT_CAP) -> list[DimVector]:
    """Distinct dimension vectors of minimal-W submodules (every V-part), excluding 0 and the whole module."""
    p = _profile(rep, cap)
    full = tuple(rep.dims)
    return [DimVector(tuple(r)) for r in p.uniq.tolist() if any(r) and tuple(r) != full]


def _exhaustive(rep: Representation, sigma: StabilityParameter, cap: int, list_limit: int = 16) -> QuiverVerdict:
    theta = theta_vector(sigma, rep.dims)
    p = _profile(rep, cap)
    S, T, dims, tab, uniq, first = p.S, p.T, p.dims, p.tab, p.uniq, p.first
    full = tuple(rep.dims)
    best = None
    zero_rows = []
    for row, k in zip(uniq.tolist(), first.tolist()):
        if tuple(row) == full:
            # (V, W) itself; a V-part equal to V with a smaller W-part gives a different row
            continue
        th = theta_of(row, theta)
        if best is None or th > best[0] or (th == best[0] and sum(row) > sum(best[1])):
            best = (th, row)
        if th == 0 and not is_degenerate(row, sigma):
            zero_rows.append(row)
    if best is None:
        return QuiverVerdict("Stable", max_theta=None)
    max_theta, row = best
    if sign(max_theta) > 0:
        k = _first_row(dims, row)
        return QuiverVerdict("Unstable", _witness(tab, S[k], T[k]), max_theta=max_theta)
    if zero_rows:
        wits = []
        for row in zero_rows:
            for k in np.flatnonzero((dims == np.array(row)).all(axis=1)):
                w = _witness(tab, S[k], T[k])
                if w not in wits:
                    wits.append(w)
                if len(wits) >= list_limit:
                    break
            if len(wits) >= list_limit:
                break
        return QuiverVerdict("Semistable", destabilizers=tuple(wits), max_theta=max_theta)
    return QuiverVerdict("Stable", max_theta=max_theta)


def _first_row(dims: np.ndarray, row) -> int:
    return int(np.flatnonzero((dims == np.array(row)).all(axis=1))[0])


def _seed_candidates(rep: Representation) -> list[list[np.ndarray]]:
    """Deterministic V-seed tuples: coordinate subspaces and arrow kernels."""
    ops = rep.ops
    per_vertex = []
    for i, n in enumerate(rep.dims.v):
        cands = []
        for k in range(n):
            e = ops.zeros(n, 1)
            e[k, 0] = 1
            cands.append(e)
            rest = ops.zeros(n, n - 1)
            cols = [c for c in range(n) if c != k]
            for t, c in enumerate(cols):
                rest[c, t] = 1
            cands.append(rest)
        mats = [A for j in range(rep.j0) for A in rep.maps[i][j]]
        for A in mats:
            cands.append(ops.nullspace(A, n))
        for A, B in itertools.combinations(mats, 2):
            cands.append(ops.nullspace(np.vstack([A, B]), n))
        if mats:
            cands.append(ops.nullspace(np.vstack(mats), n))
        cands.append(ops.eye(n))
        per_vertex.append([c for c in cands if c.shape[1]])
    zero = [ops.zeros(n, 0) for n in rep.dims.v]
    tuples = []
    for i, cands in enumerate(per_vertex):
        for c in cands:
            t = list(zero)
            t[i] = c
            tuples.append(t)
    # the same kind of candidate at every vertex simultaneously
    for k in range(max((len(c) for c in per_vertex), default=0)):
        t = [cands[k] if k < len(cands) else zero[i] for i, cands in enumerate(per_vertex)]
        tuples.append(t)
    return tuples


def _random_seed(rep: Representation, rng: np.random.Generator) -> list[np.ndarray]:
    ops = rep.ops
    out = []
    for n in rep.dims.v:
        k = int(rng.integers(0, n + 1))
        out.append(ops.random_matrix(rng, n, k) if k else ops.zeros(n, 0))
    return out


def _seeded(rep: Representation, sigma: StabilityParameter, seed: int, trials: int) -> QuiverVerdict:
    theta = theta_vector(sigma, rep.dims)
    best = None
    candidates = _seed_candidates(rep)
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        candidates.append(_random_seed(rep, rng))
    for seeds in candidates:
        sub = tight_closure(rep, seeds)
        if not is_proper(rep, sub):
            continue
        th = theta_of(sub.dims, theta)
        if best is None or th > best[0]:
            best = (th, sub)
    if best is not None and sign(best[0]) > 0:
        return QuiverVerdict("Unstable", best[1], max_theta=best[0])
    return QuiverVerdict(
        "NoDestabilizerFound", trials=len(candidates), max_theta=None if best is None else best[0], definitive=False
    )


def semistability_check(
    rep: Representation,
    sigma,
    strategy: str = "auto",
    seed: int = 0,
    trials: int = 64,
    cap: int = DEFAULT_CAP,
) -> QuiverVerdict:
    """King (semi)stability with respect to ``theta_sigma``.

    ``strategy`` is ``"exhaustive"`` (finite fields only, definitive),
    ``"seeded"`` (certifies instability only) or ``"auto"``.
    """
    sigma = as_sigma(sigma)
    if strategy == "auto":
        strategy = "exhaustive" if rep.finite else "seeded"
    if strategy == "exhaustive":
        return _exhaustive(rep, sigma, cap)
    if strategy == "seeded":
        return _seeded(rep, sigma, seed, trials)
    raise ValueError(f"unknown strategy {strategy!r}")


# ----------------------------------------------------------------------
# quotients and filtrations


def coordinates(ops, basis: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """Solve ``basis @ X = vecs`` for ``X`` (basis has independent columns)."""
    k = basis.shape[1]
    if vecs.shape[1] == 0:
        return ops.zeros(k, 0)
    if k == 0:
        return ops.zeros(0, vecs.shape[1])
    aug = np.hstack([basis, vecs])
    R, piv = ops.rref(aug)
    if piv[:k] != list(range(k)) or (len(piv) > k):
        raise ValueError("vectors are not in the span of the basis")
    return np.ascontiguousarray(R[:k, k:])


def _complement(ops, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Columns of ``upper`` extending a basis of ``lower`` to one of ``upper``."""
    n = upper.shape[0]
    cur = lower
    chosen = []
    r = lower.shape[1]
    for c in range(upper.shape[1]):
        col = upper[:, c: c + 1]
        trial = _hstack(ops, n, [cur, col])
        if ops.rank(trial) > r:
            cur, r = trial, r + 1
            chosen.append(col)
    return _hstack(ops, n, chosen)


def subquotient(rep: Representation, lower: SubmoduleWitness, upper: SubmoduleWitness, label: str = "") -> Representation:
    """The representation ``upper / lower``."""
    ops = rep.ops
    compV = [_complement(ops, lower.V[i], upper.V[i]) for i in range(rep.j0)]
    compW = [_complement(ops, lower.W[j], upper.W[j]) for j in range(rep.j0)]
    dims = DimVector.from_parts([c.shape[1] for c in compV], [c.shape[1] for c in compW])
    maps = []
    for i in range(rep.j0):
        row = []
        for j in range(rep.j0):
            mats = []
            basis = _hstack(ops, rep.dims.w[j], [lower.W[j], compW[j]])
            nl = lower.W[j].shape[1]
            for A in rep.maps[i][j]:
                if compV[i].shape[1] == 0 or compW[j].shape[1] == 0:
                    mats.append(ops.zeros(dims.w[j], dims.v[i]))
                    continue
                X = coordinates(ops, basis, ops.matmul(A, compV[i]))
                mats.append(np.ascontiguousarray(X[nl:, :]))
            row.append(mats)
        maps.append(row)
    return Representation(ops, rep.quiver, dims, maps, label)


def _rel_slope(sigma, upper_dims, lower_dims):
    dv = [a - b for a, b in zip(DimVector(tuple(upper_dims)).v, lower_dims.v)]
    dw = [a - b for a, b in zip(DimVector(tuple(upper_dims)).w, lower_dims.w)]
    return slope_mu(sigma, DimVector.from_parts(dv, dw))


def _candidates_above(rep: Representation, sigma, lower: SubmoduleWitness, cap: int):
    """Submodules strictly containing ``lower`` with minimal W-part, plus the whole module."""
    S, T, dims, tab = minimal_submodules(rep, cap, containing=lower)
    low = tuple(lower.dims)
    full = tuple(rep.dims)
    rows = []
    for k, row in enumerate(map(tuple, dims.tolist())):
        if row == low or row == full:
            continue
        rows.append((row, k))
    out = [(row, _witness(tab, S[k], T[k])) for row, k in rows]
    out.append((full, full_submodule(rep)))
    return out


def _sum_submodules(rep: Representation, subs: Sequence[SubmoduleWitness]) -> SubmoduleWitness:
    ops = rep.ops
    V = tuple(span_sum(ops, rep.dims.v[i], [s.V[i] for s in subs]) for i in range(rep.j0))
    W = tuple(span_sum(ops, rep.dims.w[j], [s.W[j] for s in subs]) for j in range(rep.j0))
    return SubmoduleWitness(V, W)


@dataclass(frozen=True)
class FiltrationStep:
    sub: SubmoduleWitness
    slope: object  # slope of the factor sub / previous

    def to_json(self, ops) -> dict:
        return {"dims": self.sub.dims.to_json(), "slope": format_slope(self.slope)}


def _require_positive(sigma: StabilityParameter) -> None:
    if not sigma.positive:
        raise ValueError("filtrations need a positive stability parameter")


def hn_filtration(rep: Representation, sigma, cap: int = DEFAULT_CAP, order: str = "forward") -> list[FiltrationStep]:
    """Harder-Narasimhan filtration for the slope ``mu`` over a finite field.

    At each step the next term is the sum of all submodules above the current
    one whose factor has maximal slope.  ``order="reverse"`` scans candidates
    in the opposite order (used to check order independence).
    """
    sigma = as_sigma(sigma)
    _require_positive(sigma)
    cur = zero_submodule(rep)
    steps: list[FiltrationStep] = []
    while is_proper(rep, cur):
        cands = _candidates_above(rep, sigma, cur, cap)
        if order == "reverse":
            cands = cands[::-1]
        slopes = [(_rel_slope(sigma, row, cur.dims), sub) for row, sub in cands if _nonzero_step(row, cur.dims)]
        top = slopes[0][0]
        for s, _ in slopes:
            if s > top:
                top = s
        best = [sub for s, sub in slopes if s == top]
        nxt = _sum_submodules(rep, best)
        got = _rel_slope(sigma, nxt.dims, cur.dims)
        if got != top:
            raise AssertionError("sum of maximal-slope submodules lost the maximal slope")
        steps.append(FiltrationStep(nxt, top))
        cur = nxt
    return steps


def _nonzero_step(row, lower_dims: DimVector) -> bool:
    return tuple(row) != tuple(lower_dims)


def hn_factors(rep: Representation, steps: Sequence[FiltrationStep]) -> list[Representation]:
    prev = zero_submodule(rep)
    out = []
    for st in steps:
        out.append(subquotient(rep, prev, st.sub))
        prev = st.sub
    return out


def slope_semistable(rep: Representation, sigma, cap: int = DEFAULT_CAP) -> bool:
    """``mu(N) <= mu(rep)`` for every nonzero submodule ``N`` (exhaustive)."""
    sigma = as_sigma(sigma)
    mu = slope_mu(sigma, rep.dims)
    S, T, dims, _ = minimal_submodules(rep, cap)
    for row in np.unique(dims, axis=0).tolist():
        if not any(row):
            continue
        try:
            m = slope_mu(sigma, row)
        except ValueError:
            continue
        if m > mu:
            return False
    return True


def jh_filtration(rep: Representation, sigma, cap: int = DEFAULT_CAP) -> list[FiltrationStep]:
    """Jordan-Hoelder filtration of a semistable representation over a finite field.

    Each step adds a smallest submodule whose factor has the slope of ``rep``.
    """
    sigma = as_sigma(sigma)
    _require_positive(sigma)
    v = semistability_check(rep, sigma, "exhaustive", cap=cap)
    if not v.semistable:
        raise NotSemistable("Jordan-Hoelder filtrations need a semistable representation")
    mu = slope_mu(sigma, rep.dims)
    cur = zero_submodule(rep)
    steps: list[FiltrationStep] = []
    while is_proper(rep, cur):
        cands = _candidates_above(rep, sigma, cur, cap)
        good = [(sum(row), k, sub) for k, (row, sub) in enumerate(cands) if _rel_slope(sigma, row, cur.dims) == mu]
        good.sort(key=lambda x: (x[0], x[1]))
        nxt = good[0][2]
        steps.append(FiltrationStep(nxt, mu))
        cur = nxt
    return steps


def jh_factors(rep: Representation, sigma, cap: int = DEFAULT_CAP) -> list[Representation]:
    return hn_factors(rep, jh_filtration(rep, sigma, cap))


# ----------------------------------------------------------------------
# isomorphism and S-equivalence


def intertwiners(a: Representation, b: Representation) -> np.ndarray:
    """Basis (columns) of all ``g`` with ``g_W phi_a = phi_b g_V`` on every arrow.

    The unknown vector stacks ``g_V1, .., g_Vj0, g_W1, .., g_Wj0`` row-major.
    """
    ops = a.ops
    blocks = [(n, n) for n in a.dims.v] + [(n, n) for n in a.dims.w]
    nvar = sum(r * c for r, c in blocks)
    outputs = []
    for col in range(nvar):
        x = ops.zeros(nvar, 1)
        x[col, 0] = 1
        g = _unpack(ops, x[:, 0], blocks)
        res = []
        for i, j, k in a.quiver.arrows():
            gV, gW = g[i], g[a.j0 + j]
            lhs = ops.matmul(gW, a.maps[i][j][k])
            rhs = ops.matmul(b.maps[i][j][k], gV)
            res.append(ops.sub_m(lhs, rhs).reshape(-1))
        outputs.append(np.concatenate(res) if res else ops.zeros(0, 1)[:, 0])
    if not outputs:
        return ops.zeros(0, 0)
    M = np.stack(outputs, axis=1)
    if M.shape[0] == 0:
        return ops.eye(nvar)
    return ops.nullspace(M, nvar)


def _unpack(ops, x: np.ndarray, blocks) -> list[np.ndarray]:
    out, pos = [], 0
    for r, c in blocks:
        out.append(np.ascontiguousarray(x[pos: pos + r * c].reshape(r, c)))
        pos += r * c
    return out


@dataclass(frozen=True)
class IsoResult:
    isomorphic: bool
    heuristic: bool = False


def is_isomorphic(a: Representation, b: Representation, seed: int = 0, tries: int = 32, cap: int = 1 << 16) -> IsoResult:
    if a.quiver != b.quiver or a.ops != b.ops:
        raise ValueError("representations over different quivers or fields")
    if tuple(a.dims) != tuple(b.dims):
        return IsoResult(False)
    ops = a.ops
    N = intertwiners(a, b)
    blocks = [(n, n) for n in a.dims.v] + [(n, n) for n in a.dims.w]
    if sum(r for r, _ in blocks) == 0:
        return IsoResult(True)
    k = N.shape[1]
    if k == 0:
        return IsoResult(False)

    def invertible(coeffs) -> bool:
        x = ops.matmul(N, coeffs)[:, 0]
        return all(ops.det_nonzero(g) for g in _unpack(ops, x, blocks) if g.shape[0])

    if a.finite and a.ops.q ** k <= cap:
        for vals in itertools.product(range(a.ops.q), repeat=k):
            if invertible(np.array(vals, dtype=np.int64).reshape(k, 1)):
                return IsoResult(True)
        return IsoResult(False)
    rng = np.random.default_rng(seed)
    for _ in range(tries):
        if invertible(ops.random_matrix(rng, k, 1)):
            return IsoResult(True)
    return IsoResult(False, heuristic=True)


@dataclass(frozen=True)
class SEquivalence:
    equivalent: bool
    heuristic: bool = False


def s_equivalent(a: Representation, b: Representation, sigma, cap: int = DEFAULT_CAP, seed: int = 0) -> SEquivalence:
    """Compare Jordan-Hoelder graded pieces as multisets up to isomorphism."""
    fa, fb = jh_factors(a, sigma, cap), jh_factors(b, sigma, cap)
    if len(fa) != len(fb):
        return SEquivalence(False)
    heuristic = False
    remaining = list(fb)
    for x in fa:
        hit = None
        for t, y in enumerate(remaining):
            r = is_isomorphic(x, y, seed=seed)
            heuristic |= r.heuristic
            if r.isomorphic:
                hit = t
                break
        if hit is None:
            return SEquivalence(False, heuristic)
        remaining.pop(hit)
    return SEquivalence(True, heuristic)


