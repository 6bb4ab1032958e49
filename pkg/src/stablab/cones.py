"""Intersection-theoretic computations on N^1(X).

An :class:`IntersectionTensor` stores the top intersection numbers of a
basis ``D_1..D_rho`` of N^1(X).  Divisor classes are coordinate vectors in
that basis; curve classes are stored by their pairings ``(gamma . D_i)_i``.
All results are exact.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from . import linalg
from .exact import format_scalar, parse_scalar, sign, simplify


class HodgeFailure(ValueError):
    """The intersection form of ``L`` is degenerate (``L`` cannot be ample)."""


def _key(idx: Sequence[int]) -> tuple[int, ...]:
    return tuple(sorted(int(i) for i in idx))


@dataclass(frozen=True)
class IntersectionTensor:
    n: int
    rho: int
    entries: Mapping[tuple[int, ...], Fraction]
    name: str = ""
    ample_samples: tuple[tuple, ...] = ()

    def __post_init__(self):
        if self.n < 1 or self.rho < 1:
            raise ValueError("need n >= 1 and rho >= 1")
        clean = {}
        for k, v in self.entries.items():
            k = _key(k)
            if len(k) != self.n or not all(0 <= i < self.rho for i in k):
                raise ValueError(f"bad index multiset {k} for n={self.n}, rho={self.rho}")
            v = simplify(parse_scalar(v) if isinstance(v, str) else Fraction(v))
            if v != 0:
                clean[k] = v
        object.__setattr__(self, "entries", clean)

    def value(self, idx: Sequence[int]) -> Fraction:
        return self.entries.get(_key(idx), Fraction(0))

    # -- JSON -----------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "n": self.n,
            "rho": self.rho,
            "entries": [
                {"idx": [i + 1 for i in k], "val": format_scalar(v)}
                for k, v in sorted(self.entries.items())
            ],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> IntersectionTensor:
        entries = {}
        for e in obj["entries"]:
            entries[_key(i - 1 for i in e["idx"])] = parse_scalar(str(e["val"]))
        samples = tuple(
            tuple(parse_scalar(str(x)) for x in s) for s in obj.get("ample_samples", ())
        )
        return cls(int(obj["n"]), int(obj["rho"]), entries, obj.get("name", ""), samples)


# ----------------------------------------------------------------------
# evaluation


def eval_classes(tensor: IntersectionTensor, classes: Sequence[Sequence]):
    """Multilinear evaluation ``D^(1) . D^(2) ... D^(n)``."""
    if len(classes) != tensor.n:
        raise ValueError(f"need {tensor.n} classes, got {len(classes)}")
    for c in classes:
        if len(c) != tensor.rho:
            raise ValueError(f"class has {len(c)} coordinates, expected {tensor.rho}")
    total = Fraction(0)
    supports = [[(i, x) for i, x in enumerate(c) if x != 0] for c in classes]
    for combo in itertools.product(*supports):
        v = tensor.value([i for i, _ in combo])
        if v == 0:
            continue
        term = v
        for _, x in combo:
            term = term * x
        total = total + term
    return simplify(total)


def power_pairing(tensor: IntersectionTensor, L: Sequence, k: int, others: Sequence[Sequence] = ()):
    """``others . L^k`` where ``len(others) + k == n``."""
    return eval_classes(tensor, list(others) + [L] * k)


def curve_power(tensor: IntersectionTensor, L: Sequence, k: int = None) -> list:
    """Curve class ``L^(n-1)`` (or ``L^k . D`` pairings), stored as pairings with the basis."""
    k = tensor.n - 1 if k is None else k
    basis = _basis(tensor.rho)
    return [eval_classes(tensor, [e] + [L] * k) for e in basis]


def curve_of(tensor: IntersectionTensor, L: Sequence, beta: Sequence) -> list:
    """Curve class ``L^(n-2) . beta`` as pairings with the basis."""
    return [eval_classes(tensor, [e, beta] + [L] * (tensor.n - 2)) for e in _basis(tensor.rho)]


def pair_curve(gamma: Sequence, D: Sequence):
    return simplify(sum((g * d for g, d in zip(gamma, D)), Fraction(0)))


def _basis(rho: int) -> list[list[Fraction]]:
    return [[Fraction(int(i == j)) for j in range(rho)] for i in range(rho)]


def q_form_matrix(tensor: IntersectionTensor, L: Sequence) -> list[list]:
    """Matrix ``A_ij = D_i D_j L^(n-2)`` of the form ``q_L(a) = a^2 L^(n-2)``."""
    basis = _basis(tensor.rho)
    return [
        [eval_classes(tensor, [basis[i], basis[j]] + [L] * (tensor.n - 2)) for j in range(tensor.rho)]
        for i in range(tensor.rho)
    ]


def signature(matrix: Sequence[Sequence]) -> tuple[int, int, int]:
    return linalg.signature(matrix)


def hodge_signature_ok(tensor: IntersectionTensor, L: Sequence) -> bool:
    return signature(q_form_matrix(tensor, L)) == (1, tensor.rho - 1, 0)


def kplus_contains(tensor: IntersectionTensor, L: Sequence, beta: Sequence) -> bool:
    """``beta^2 L^(n-2) > 0`` and ``beta L^(n-1) > 0``."""
    n = tensor.n
    q = eval_classes(tensor, [beta, beta] + [L] * (n - 2))
    lin = eval_classes(tensor, [beta] + [L] * (n - 1))
    return sign(q) > 0 and sign(lin) > 0


def lefschetz_solve(tensor: IntersectionTensor, L: Sequence, gamma: Sequence) -> list:
    """The divisor ``beta`` with ``L^(n-2) . beta = gamma``."""
    A = q_form_matrix(tensor, L)
    try:
        return linalg.solve(A, list(gamma))
    except ValueError as exc:
        raise HodgeFailure(f"intersection form of L={list(map(str, L))} is degenerate") from exc


def cplus_witness(tensor: IntersectionTensor, gamma: Sequence, L: Sequence) -> list | None:
    """``beta`` in ``K+_L`` with ``L^(n-2) beta = gamma``, or None."""
    beta = lefschetz_solve(tensor, L, gamma)
    return beta if kplus_contains(tensor, L, beta) else None


# ----------------------------------------------------------------------
# Chern data, discriminants


@dataclass(frozen=True)
class ChernData:
    """Rank, ``c1`` in the N^1 basis, and ``c2 . (degree n-2 basis monomials)``."""

    rank: Fraction
    c1: tuple
    c2pair: Mapping[tuple[int, ...], Fraction] = field(default_factory=dict)

    def __post_init__(self):
        r = simplify(Fraction(self.rank) if not hasattr(self.rank, "sign") else self.rank)
        if sign(r) <= 0:
            raise ValueError("rank must be positive")
        object.__setattr__(self, "rank", r)
        object.__setattr__(self, "c1", tuple(simplify(x) for x in self.c1))
        object.__setattr__(
            self, "c2pair", {_key(k): simplify(Fraction(v) if isinstance(v, int) else v) for k, v in self.c2pair.items()}
        )

    def c2_dot(self, tensor: IntersectionTensor, L: Sequence):
        """``c2 . L^(n-2)`` expanded multinomially in the basis."""
        k = tensor.n - 2
        total = Fraction(0)
        for combo in itertools.product(range(tensor.rho), repeat=k):
            v = self.c2pair.get(_key(combo), 0)
            if v == 0:
                continue
            term = v
            for i in combo:
                term = term * L[i]
            total = total + term
        return simplify(total)

    def to_json(self) -> dict:
        return {
            "rank": format_scalar(self.rank),
            "c1": [format_scalar(x) for x in self.c1],
            "c2pair": [
                {"idx": [i + 1 for i in k], "val": format_scalar(v)} for k, v in sorted(self.c2pair.items())
            ],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> ChernData:
        c2 = {_key(i - 1 for i in e["idx"]): parse_scalar(str(e["val"])) for e in obj.get("c2pair", [])}
        return cls(parse_scalar(str(obj["rank"])), tuple(parse_scalar(str(x)) for x in obj["c1"]), c2)


def c1_squared(tensor: IntersectionTensor, F: ChernData, L: Sequence):
    return eval_classes(tensor, [list(F.c1), list(F.c1)] + [L] * (tensor.n - 2))


def discriminant_pair(F: ChernData, tensor: IntersectionTensor, L: Sequence):
    """``Delta(F) . L^(n-2)`` with ``Delta = (c2 - (r-1)/(2r) c1^2) / r``."""
    r = F.rank
    return simplify((F.c2_dot(tensor, L) - (r - 1) / (2 * r) * c1_squared(tensor, F, L)) / r)


def discriminant_std(F: ChernData, tensor: IntersectionTensor, L: Sequence):
    """``(2 r c2 - (r-1) c1^2) . L^(n-2)``."""
    r = F.rank
    return simplify(2 * r * F.c2_dot(tensor, L) - (r - 1) * c1_squared(tensor, F, L))


def xi(G1: ChernData, G: ChernData) -> list:
    """``c1(G1)/rank(G1) - c1(G)/rank(G)``."""
    return [simplify(a / G1.rank - b / G.rank) for a, b in zip(G1.c1, G.c1)]


def bogomolov_unstable(F: ChernData, tensor: IntersectionTensor, L: Sequence, beta_const=0) -> bool:
    """Whether ``Delta(F) L^(n-2) + r^2 (r-1)^2 beta < 0``."""
    if sign(beta_const) < 0:
        raise ValueError("beta constant must be non-negative")
    r = F.rank
    return sign(discriminant_pair(F, tensor, L) + r * r * (r - 1) ** 2 * beta_const) < 0


def extension_chern(A: ChernData, B: ChernData, tensor: IntersectionTensor) -> ChernData:
    """Chern data of ``E`` with ``c(E) = c(A) c(B)``."""
    rho, k = tensor.rho, tensor.n - 2
    c2 = Counter()
    for m in set(A.c2pair) | set(B.c2pair):
        c2[m] += A.c2pair.get(m, 0) + B.c2pair.get(m, 0)
    # c1(A).c1(B) as a codimension-2 class paired against degree n-2 monomials
    for mono in itertools.combinations_with_replacement(range(rho), k):
        basis = _basis(rho)
        c2[mono] += eval_classes(tensor, [list(A.c1), list(B.c1)] + [basis[i] for i in mono])
    c1 = tuple(a + b for a, b in zip(A.c1, B.c1))
    return ChernData(A.rank + B.rank, c1, {m: v for m, v in c2.items() if v != 0})


@dataclass(frozen=True)
class IdentityCheck:
    lhs: object
    rhs: object
    equal: bool


def extension_discriminant_identity(A: ChernData, B: ChernData, tensor: IntersectionTensor, L: Sequence) -> IdentityCheck:
    """Check ``D(E)/r - D(A)/p - D(B)/q = -(p q / r) xi_{A,B}^2`` against ``L^(n-2)``.

    ``D`` is the normalized discriminant ``2 r c2 - (r-1) c1^2`` and ``E``
    has total Chern class ``c(A) c(B)``.  Both sides are computed independently.
    """
    E = extension_chern(A, B, tensor)
    p, q, r = A.rank, B.rank, E.rank
    lhs = (
        discriminant_std(E, tensor, L) / r
        - discriminant_std(A, tensor, L) / p
        - discriminant_std(B, tensor, L) / q
    )
    x = xi(A, B)
    rhs = -(p * q / r) * eval_classes(tensor, [x, x] + [L] * (tensor.n - 2))
    lhs, rhs = simplify(lhs), simplify(rhs)
    return IdentityCheck(lhs, rhs, lhs == rhs)


def crossterm_nondegenerate(gamma0: Sequence, gamma_inf: Sequence, L1: Sequence, L2: Sequence) -> bool:
    """``(g_inf.L1)(g0.L2) - (g_inf.L2)(g0.L1) != 0``."""
    d = pair_curve(gamma_inf, L1) * pair_curve(gamma0, L2) - pair_curve(gamma_inf, L2) * pair_curve(gamma0, L1)
    return d != 0


# ----------------------------------------------------------------------
# C+ path certificates


@dataclass(frozen=True)
class PathPoint:
    u: Fraction  # gamma_u = (1-u) gamma0 + u gamma_inf; t = u / (1 - u)
    s: Fraction | None  # L(s) = (1-s) L2 + s L1
    beta: tuple | None

    @property
    def ok(self) -> bool:
        return self.beta is not None


@dataclass(frozen=True)
class PathCertificate:
    points: tuple[PathPoint, ...]

    @property
    def ok(self) -> bool:
        return all(p.ok for p in self.points)

    @property
    def failures(self) -> list[PathPoint]:
        return [p for p in self.points if not p.ok]


def _s_candidates(u: Fraction, resolution: Fraction):
    seen = set()
    for s in (u, Fraction(1) - u, Fraction(0), Fraction(1), Fraction(1, 2)):
        if s not in seen:
            seen.add(s)
            yield s
    k = 1
    while Fraction(1, 2**k) >= resolution:
        for j in range(1, 2**k, 2):
            s = Fraction(j, 2**k)
            if s not in seen:
                seen.add(s)
                yield s
        k += 1


def cplus_path_certificate(
    tensor: IntersectionTensor,
    gamma0: Sequence,
    gamma_inf: Sequence,
    L1: Sequence,
    L2: Sequence,
    t_samples: int = 101,
    s_resolution: Fraction = Fraction(1, 1024),
) -> PathCertificate:
    """Certify ``(1-u) gamma0 + u gamma_inf`` in ``C+(X)`` along a u-grid.

    For each sample a rational ``s`` is searched so that the segment class
    ``L(s) = (1-s) L2 + s L1`` carries a witness ``beta`` in ``K+_{L(s)}``
    with ``L(s)^(n-2) beta = gamma_u``.
    """
    if cplus_witness(tensor, gamma0, L2) is None:
        raise ValueError("gamma0 is not in L2^(n-2) K+_L2")
    if cplus_witness(tensor, gamma_inf, L1) is None:
        raise ValueError("gamma_inf is not in L1^(n-2) K+_L1")
    if t_samples < 2:
        raise ValueError("need at least two samples")
    points = []
    for k in range(t_samples):
        u = Fraction(k, t_samples - 1)
        gamma = [simplify((1 - u) * a + u * b) for a, b in zip(gamma0, gamma_inf)]
        found = None
        for s in _s_candidates(u, Fraction(s_resolution)):
            L = [simplify((1 - s) * a + s * b) for a, b in zip(L2, L1)]
            try:
                beta = cplus_witness(tensor, gamma, L)
            except HodgeFailure:
                continue
            if beta is not None:
                found = PathPoint(u, s, tuple(beta))
                break
        points.append(found or PathPoint(u, None, None))
    return PathCertificate(tuple(points))


def verify_path_point(tensor: IntersectionTensor, gamma0, gamma_inf, L1, L2, pt: PathPoint) -> bool:
    """Independent re-check of one certificate entry."""
    if not pt.ok:
        return False
    L = [(1 - pt.s) * a + pt.s * b for a, b in zip(L2, L1)]
    gamma = [(1 - pt.u) * a + pt.u * b for a, b in zip(gamma0, gamma_inf)]
    if curve_of(tensor, L, list(pt.beta)) != [simplify(g) for g in gamma]:
        return False
    return kplus_contains(tensor, L, list(pt.beta))


# ----------------------------------------------------------------------
# bundled examples


def _t(n, rho, entries, name, samples):
    return IntersectionTensor(
        n, rho, {_key(i - 1 for i in k): Fraction(v) for k, v in entries.items()}, name,
        tuple(tuple(Fraction(x) for x in s) for s in samples),
    )


LIBRARY: dict[str, IntersectionTensor] = {
    "P2": _t(2, 1, {(1, 1): 1}, "P2", [(1,), (2,), (3,), (5,), (Fraction(1, 2),)]),
    "P1xP1": _t(2, 2, {(1, 2): 1}, "P1xP1", [(1, 1), (1, 2), (3, 1), (2, 5), (Fraction(1, 3), 4)]),
    "Bl1P2": _t(
        2, 2, {(1, 1): 1, (2, 2): -1}, "Bl1P2",
        [(2, -1), (3, -1), (3, -2), (5, -4), (Fraction(7, 2), -1)],
    ),
    "P3": _t(3, 1, {(1, 1, 1): 1}, "P3", [(1,), (2,), (4,), (7,), (Fraction(2, 3),)]),
    "P1xP1xP1": _t(
        3, 3, {(1, 2, 3): 1}, "P1xP1xP1",
        [(1, 1, 1), (1, 2, 3), (3, 1, 2), (5, 1, 1), (Fraction(1, 2), 2, 7)],
    ),
    "P1xP2": _t(3, 2, {(1, 2, 2): 1}, "P1xP2", [(1, 1), (2, 1), (1, 3), (5, 2), (Fraction(1, 4), 1)]),
}


def library(name: str) -> IntersectionTensor:
    try:
        return LIBRARY[name]
    except KeyError:
        raise KeyError(f"unknown tensor {name!r}; bundled: {sorted(LIBRARY)}") from None


def is_ample_declared(tensor: IntersectionTensor, L: Sequence) -> bool:
    """Numerical ampleness for the bundled examples (nef cone is known there)."""
    name = tensor.name
    if name in ("P2", "P3", "P1xP1", "P1xP1xP1", "P1xP2"):
        return all(sign(x) > 0 for x in L)
    if name == "Bl1P2":
        a, c = L
        return sign(-c) > 0 and sign(a + c) > 0
    raise ValueError(f"no ample-cone description for {name!r}")

