"""Numerical sheaf surrogates and multi-Gieseker comparisons.

A :class:`SheafClass` carries the coefficients ``alpha[j][i]`` of the
Hilbert polynomials ``P^{L_j}(m) = sum_i alpha[j][i] m^i / i!`` for a fixed
list of line bundles ``L_1..L_j0``.  Stability verdicts are always relative
to an explicit finite :class:`FamilySpec` of candidate subsheaves.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .cones import ChernData, pair_curve
from .exact import common_field, format_scalar, parse_scalar, sign, simplify
from .poly import Ordering, Poly, hilbert_basis_poly, poly_compare, poly_eval


def _scalar(x):
    if isinstance(x, str):
        return simplify(parse_scalar(x))
    if isinstance(x, float):
        raise TypeError("floats are not accepted; use exact strings or Fractions")
    return simplify(x)


@dataclass(frozen=True)
class SheafClass:
    dim: int
    rank: object
    alpha: tuple
    label: str = ""
    chern: ChernData | None = None

    def __post_init__(self):
        if self.dim < 0:
            raise ValueError("dim must be >= 0")
        rows = tuple(tuple(_scalar(x) for x in row) for row in self.alpha)
        if not rows:
            raise ValueError("alpha needs at least one row")
        for j, row in enumerate(rows):
            if len(row) != self.dim + 1:
                raise ValueError(f"alpha row {j} has {len(row)} entries, expected {self.dim + 1}")
            if sign(row[self.dim]) <= 0:
                raise ValueError(f"multiplicity alpha[{j}][{self.dim}] must be positive")
        r = _scalar(self.rank)
        if sign(r) <= 0:
            raise ValueError("rank must be positive")
        object.__setattr__(self, "alpha", rows)
        object.__setattr__(self, "rank", r)

    @property
    def j0(self) -> int:
        return len(self.alpha)

    def hilbert(self, j: int) -> Poly:
        return hilbert_basis_poly(self.alpha[j])

    def same_numbers(self, other: SheafClass) -> bool:
        return self.dim == other.dim and self.rank == other.rank and self.alpha == other.alpha

    def to_json(self) -> dict:
        out = {
            "label": self.label,
            "dim": self.dim,
            "rank": format_scalar(self.rank),
            "alpha": [[format_scalar(x) for x in row] for row in self.alpha],
        }
        if self.chern is not None:
            out["chern"] = self.chern.to_json()
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> SheafClass:
        chern = ChernData.from_json(obj["chern"]) if obj.get("chern") else None
        return cls(
            int(obj["dim"]),
            parse_scalar(str(obj["rank"])),
            tuple(tuple(parse_scalar(str(x)) for x in row) for row in obj["alpha"]),
            str(obj.get("label", "")),
            chern,
        )


@dataclass(frozen=True)
class StabilityParameter:
    sigma: tuple

    def __post_init__(self):
        s = tuple(_scalar(x) for x in self.sigma)
        if not s:
            raise ValueError("empty stability parameter")
        if any(sign(x) < 0 for x in s):
            raise ValueError("stability parameter entries must be >= 0")
        if all(sign(x) == 0 for x in s):
            raise ValueError("stability parameter must not be zero")
        object.__setattr__(self, "sigma", s)

    @property
    def positive(self) -> bool:
        return all(sign(x) > 0 for x in self.sigma)

    @property
    def rational(self) -> bool:
        return all(isinstance(x, Fraction) for x in self.sigma)

    def __len__(self) -> int:
        return len(self.sigma)

    def __iter__(self):
        return iter(self.sigma)

    def __getitem__(self, j):
        return self.sigma[j]

    def scaled(self, c) -> StabilityParameter:
        if sign(c) <= 0:
            raise ValueError("scale must be positive")
        return StabilityParameter(tuple(c * x for x in self.sigma))

    def normalized(self) -> StabilityParameter:
        total = sum(self.sigma, Fraction(0))
        return StabilityParameter(tuple(x / total for x in self.sigma))

    def to_json(self) -> list[str]:
        return [format_scalar(x) for x in self.sigma]


def as_sigma(sigma) -> StabilityParameter:
    return sigma if isinstance(sigma, StabilityParameter) else StabilityParameter(tuple(sigma))


@dataclass(frozen=True)
class FamilySpec:
    candidates: tuple = ()
    relation: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        object.__setattr__(self, "relation", tuple(tuple(r) for r in self.relation))
        labels = {c.label for c in self.candidates}
        for sub, sup in self.relation:
            if sub not in labels or sup not in labels:
                raise ValueError(f"relation ({sub}, {sup}) names an unknown candidate")

    def __len__(self) -> int:
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)


# ----------------------------------------------------------------------
# polynomials


def _check_sigma(E: SheafClass, sigma: StabilityParameter) -> None:
    if len(sigma) != E.j0:
        raise ValueError(f"sigma has {len(sigma)} entries, sheaf has j0={E.j0}")


def multiplicity(E: SheafClass, sigma) -> object:
    """``r^sigma = sum_j sigma_j alpha_d^{L_j}``."""
    return weighted_alpha(E, sigma)[E.dim]


def weighted_alpha(E: SheafClass, sigma) -> list:
    sigma = as_sigma(sigma)
    _check_sigma(E, sigma)
    return [
        simplify(sum((s * row[i] for s, row in zip(sigma, E.alpha)), Fraction(0)))
        for i in range(E.dim + 1)
    ]


def multi_hilbert(E: SheafClass, sigma) -> Poly:
    """``P^sigma(m) = sum_j sigma_j P^{L_j}(m)``."""
    alpha = weighted_alpha(E, sigma)
    return hilbert_basis_poly(alpha, common_field(alpha))


def reduced_hilbert(E: SheafClass, sigma) -> Poly:
    alpha = weighted_alpha(E, sigma)
    r = alpha[E.dim]
    return hilbert_basis_poly([a / r for a in alpha], common_field(alpha))


def mu_hat(E: SheafClass, sigma) -> object:
    """``alpha_{d-1}^sigma / r^sigma``."""
    if E.dim == 0:
        raise ValueError("slope is undefined for zero-dimensional sheaves")
    alpha = weighted_alpha(E, sigma)
    return simplify(alpha[E.dim - 1] / alpha[E.dim])


def mu_hat_bundle(E: SheafClass, j: int) -> object:
    if E.dim == 0:
        raise ValueError("slope is undefined for zero-dimensional sheaves")
    return simplify(E.alpha[j][E.dim - 1] / E.alpha[j][E.dim])


def _compare_reduced(pE: Poly, pF: Poly) -> Ordering:
    f = common_field(pE.coeffs + pF.coeffs)
    return poly_compare(pF.lift(f), pE.lift(f))


def compare_pair(E: SheafClass, F: SheafClass, sigma) -> Ordering:
    """Eventual order of ``p_F`` against ``p_E``."""
    if E.dim != F.dim:
        raise ValueError(f"dimension mismatch: {E.dim} vs {F.dim}")
    if E.j0 != F.j0:
        raise ValueError(f"j0 mismatch: {E.j0} vs {F.j0}")
    sigma = as_sigma(sigma)
    return _compare_reduced(reduced_hilbert(E, sigma), reduced_hilbert(F, sigma))


# ----------------------------------------------------------------------
# verdicts


class Kind(enum.Enum):
    STABLE = "Stable"
    STRICTLY_SEMISTABLE = "StrictlySemistable"
    UNSTABLE = "Unstable"


@dataclass(frozen=True)
class Verdict:
    kind: Kind
    witnesses: tuple = ()
    vacuous: bool = False

    def to_json(self) -> dict:
        return {
            "verdict": self.kind.value,
            "witnesses": [w.label for w in self.witnesses],
            "vacuous": self.vacuous,
        }


def check_candidate(E: SheafClass, F: SheafClass) -> None:
    if F.dim != E.dim:
        raise ValueError(f"candidate {F.label!r} has dim {F.dim}, target has {E.dim}")
    if F.j0 != E.j0:
        raise ValueError(f"candidate {F.label!r} has j0={F.j0}, target has {E.j0}")
    if F.rank > E.rank:
        raise ValueError(f"candidate {F.label!r} has larger rank than the target")
    if F.same_numbers(E):
        raise ValueError(f"candidate {F.label!r} is numerically equal to the target; candidates must be proper")


def verdict_vector(E: SheafClass, family: FamilySpec, sigma) -> tuple[Ordering, ...]:
    sigma = as_sigma(sigma)
    pE = reduced_hilbert(E, sigma)
    out = []
    for F in family:
        check_candidate(E, F)
        out.append(_compare_reduced(pE, reduced_hilbert(F, sigma)))
    return tuple(out)


def verdict(E: SheafClass, family: FamilySpec, sigma) -> Verdict:
    """Stability of ``E`` relative to the candidates in ``family``."""
    orders = verdict_vector(E, family, sigma)
    if not orders:
        return Verdict(Kind.STABLE, (), vacuous=True)
    for F, o in zip(family, orders):
        if o is Ordering.GREATER:
            return Verdict(Kind.UNSTABLE, (F,))
    equal = tuple(F for F, o in zip(family, orders) if o is Ordering.EQUAL)
    if equal:
        return Verdict(Kind.STRICTLY_SEMISTABLE, equal)
    return Verdict(Kind.STABLE)


_RELS = {
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
}


def mu_hat_component_bound(E: SheafClass, sigma, mu, direction: str = "<=") -> int:
    """Index ``j`` (0-based) with ``sigma_j != 0`` and ``mu_hat^{L_j}(E) rel mu``.

    ``mu_hat^sigma`` is a weighted mean of the per-bundle slopes, so such a
    ``j`` exists whenever ``mu_hat^sigma(E) rel mu``.
    """
    if direction not in _RELS:
        raise ValueError(f"direction must be one of {sorted(_RELS)}")
    sigma = as_sigma(sigma)
    rel = _RELS[direction]
    mu = _scalar(mu)
    if not rel(mu_hat(E, sigma), mu):
        raise ValueError(f"precondition fails: mu_hat^sigma(E) {direction} {format_scalar(mu)} is false")
    for j, s in enumerate(sigma):
        if sign(s) != 0 and rel(mu_hat_bundle(E, j), mu):
            return j
    raise AssertionError("no admissible index; weighted-mean argument violated")


# ----------------------------------------------------------------------
# section counts


def lps_constant(r: int, d: int) -> Fraction:
    """``r^2 + (r + d)/2 - 1``."""
    if r < 1:
        raise ValueError("rank must be a positive integer")
    if d < 0:
        raise ValueError("dimension must be >= 0")
    return Fraction(r * r) + Fraction(r + d, 2) - 1


def _pos(x):
    return x if sign(x) > 0 else Fraction(0)


def lps_bound(r: int, d: int, mu_max, mu, C, n) -> object:
    """``(r-1)/d! [mu_max + C + n]_+^d + 1/d! [mu + C + n]_+^d``."""
    if r < 1:
        raise ValueError("rank must be a positive integer")
    if d < 0:
        raise ValueError("dimension must be >= 0")
    if sign(_scalar(n)) <= 0:
        raise ValueError("n must be positive")
    f = Fraction(1, math.factorial(d))
    mu_max, mu, C, n = (_scalar(x) for x in (mu_max, mu, C, n))
    return simplify((r - 1) * f * _pos(mu_max + C + n) ** d + f * _pos(mu + C + n) ** d)


def section_stability_test(
    h0: Sequence,
    sub_mult,
    E: SheafClass,
    sigma,
    n,
    sub: SheafClass | None = None,
    polynomial: bool = False,
) -> Ordering:
    """Compare a weighted section count of a subsheaf with ``E``'s reduced polynomial.

    Scalar form: ``sum_j sigma_j h0_j / sub_mult`` against ``p_E(n)``.
    Polynomial form (needs ``sub``): ``(sum_j sigma_j h0_j) P_E`` against
    ``P_E(n) P_sub`` in the eventual order.
    """
    sigma = as_sigma(sigma)
    _check_sigma(E, sigma)
    if len(h0) != E.j0:
        raise ValueError(f"need {E.j0} section counts, got {len(h0)}")
    h0 = [_scalar(x) for x in h0]
    if any(sign(x) < 0 for x in h0):
        raise ValueError("section counts must be non-negative")
    weighted = simplify(sum((s * h for s, h in zip(sigma, h0)), Fraction(0)))
    if polynomial:
        if sub is None:
            raise ValueError("the polynomial form needs the subsheaf class")
        PE = multi_hilbert(E, sigma)
        lhs = PE * weighted
        rhs = multi_hilbert(sub, sigma) * poly_eval(PE, n)
        f = common_field(lhs.coeffs + rhs.coeffs)
        return poly_compare(lhs.lift(f), rhs.lift(f))
    sub_mult = _scalar(sub_mult)
    if sign(sub_mult) == 0:
        raise ValueError("zero multiplicity")
    lhs = simplify(weighted / sub_mult)
    rhs = poly_eval(reduced_hilbert(E, sigma), _scalar(n))
    return Ordering.from_sign(sign(lhs - rhs))


# ----------------------------------------------------------------------
# slope stability from Chern data


def slope_gamma(F: SheafClass, gamma: Sequence) -> object:
    """``c1(F) . gamma / rank(F)`` for a curve class given by pairings."""
    if F.chern is None:
        raise ValueError(f"{F.label!r} carries no Chern data")
    return simplify(pair_curve(gamma, F.chern.c1) / F.chern.rank)


def slope_verdict(E: SheafClass, family: FamilySpec, gamma: Sequence) -> Kind:
    """Slope stability against candidates of strictly smaller rank."""
    muE = slope_gamma(E, gamma)
    kind = Kind.STABLE
    for F in family:
        if not F.rank < E.rank:
            continue
        d = sign(slope_gamma(F, gamma) - muE)
        if d > 0:
            return Kind.UNSTABLE
        if d == 0:
            kind = Kind.STRICTLY_SEMISTABLE
    return kind


__all__ = [
    "FamilySpec",
    "Kind",
    "SheafClass",
    "StabilityParameter",
    "Verdict",
    "as_sigma",
    "check_candidate",
    "compare_pair",
    "lps_bound",
    "lps_constant",
    "mu_hat",
    "mu_hat_bundle",
    "mu_hat_component_bound",
    "multi_hilbert",
    "multiplicity",
    "reduced_hilbert",
    "section_stability_test",
    "slope_gamma",
    "slope_verdict",
    "verdict",
    "verdict_vector",
    "weighted_alpha",
]

