"""Walls and chambers in the space of stability parameters.

For a candidate ``F`` of ``E`` and a coefficient index ``i`` the wall form is

    normal_j = alpha_i^{L_j}(F) / rank(F) - alpha_i^{L_j}(E) / rank(E).

When every multiplicity satisfies ``alpha_d^{L_j} = rank * c_j`` with the same
``c_j`` for all sheaves involved, the sign of ``normal . sigma`` is the sign
of the degree-``i`` coefficient of ``p_F - p_E``.  Chambers are sign vectors
over the wall list; feasibility is decided by an exact simplex (or by
Fourier-Motzkin elimination on request).
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import linalg
from .exact import sign, simplify
from .lp import fourier_motzkin, max_margin, satisfies
from .sheaf import FamilySpec, SheafClass, StabilityParameter, as_sigma, check_candidate

REGIONS = ("full", "positive")


class InfeasibleError(ValueError):
    """No stability parameter realizes the requested sign vector."""


@dataclass(frozen=True)
class Wall:
    normal: tuple[int, ...]
    origins: tuple[tuple[int, str, str], ...] = ()

    def value(self, sigma):
        return simplify(sum((a * s for a, s in zip(self.normal, sigma)), Fraction(0)))

    def to_json(self) -> dict:
        return {
            "normal": list(self.normal),
            "origins": [{"i": i, "F": f, "E": e} for i, f, e in self.origins],
        }


@dataclass(frozen=True)
class Chamber:
    signs: tuple[int, ...]
    sample: tuple[Fraction, ...]
    full_dim: bool

    def to_json(self) -> dict:
        return {
            "signs": "".join("+0-"[1 - s] for s in self.signs),
            "sample": [str(x) for x in self.sample],
            "full_dim": self.full_dim,
        }


def canonical_normal(v: Sequence) -> tuple[int, ...] | None:
    """Coprime integer vector with first nonzero entry positive; None for zero."""
    v = [Fraction(x) for x in v]
    if all(x == 0 for x in v):
        return None
    den = math.lcm(*(x.denominator for x in v))
    ints = [int(x * den) for x in v]
    g = math.gcd(*ints)
    ints = [x // g for x in ints]
    first = next(x for x in ints if x != 0)
    if first < 0:
        ints = [-x for x in ints]
    return tuple(ints)


def check_proportional(E: SheafClass, family: FamilySpec) -> None:
    """Multiplicities must be ``rank * c_j`` with ``c_j`` shared by all sheaves."""
    c = [row[E.dim] / E.rank for row in E.alpha]
    for F in family:
        cf = [row[F.dim] / F.rank for row in F.alpha]
        if cf != c:
            raise ValueError(
                f"multiplicities of {F.label!r} are not rank-proportional to those of {E.label!r}; "
                "wall forms would not be linear"
            )


def compute_walls(E: SheafClass, family: FamilySpec, include_constant: bool = True) -> list[Wall]:
    """Deduplicated walls for all candidates and coefficient indices.

    Indices run over ``0..d-1``; with ``include_constant=False`` the constant
    term is skipped and only ``1..d-1`` is used.  Zero forms and forms that
    are strictly sign-definite on the orthant are discarded.
    """
    if E.dim == 0:
        raise ValueError("walls need sheaves of positive dimension")
    for F in family:
        check_candidate(E, F)
    check_proportional(E, family)
    lo = 0 if include_constant else 1
    walls: dict[tuple[int, ...], list] = {}
    for F in family:
        for i in range(lo, E.dim):
            form = [
                Fraction(F.alpha[j][i] / F.rank - E.alpha[j][i] / E.rank) for j in range(E.j0)
            ]
            normal = canonical_normal(form)
            if normal is None:
                continue
            if all(x > 0 for x in normal) or all(x < 0 for x in normal):
                continue
            walls.setdefault(normal, []).append((i, F.label, E.label))
    return [Wall(n, tuple(o)) for n, o in walls.items()]


def predicted_order(E: SheafClass, F: SheafClass, sigma) -> int:
    """Sign of ``p_F - p_E`` read off the linear wall forms, top index first."""
    for i in range(E.dim - 1, -1, -1):
        form = [F.alpha[j][i] / F.rank - E.alpha[j][i] / E.rank for j in range(E.j0)]
        s = sign(sum((a * x for a, x in zip(form, sigma)), Fraction(0)))
        if s:
            return s
    return 0


# ----------------------------------------------------------------------
# constraint systems


def _region_constraints(j0: int, region: str) -> list:
    if region not in REGIONS:
        raise ValueError(f"region must be one of {REGIONS}")
    rows = [([1] * j0, "=", 1)]
    if region == "full":
        return rows  # sigma >= 0 is implicit in the solver
    for j in range(j0):
        e = [0] * j0
        e[j] = 1
        rows.append((e, ">", 0))
    return rows


def _sign_rows(walls: Sequence[Wall], signs: Sequence[int]) -> list:
    rel = {1: ">", 0: "=", -1: "<"}
    return [(list(w.normal), rel[s], 0) for w, s in zip(walls, signs)]


def constraints_for(walls: Sequence[Wall], signs: Sequence[int], j0: int, region: str = "full") -> list:
    return _region_constraints(j0, region) + _sign_rows(walls, signs)


def feasible_point(constraints, nvars: int, method: str = "simplex"):
    """Rational point satisfying ``constraints`` (all variables are ``>= 0``)."""
    if method == "simplex":
        res = max_margin(constraints, nvars, nonneg=True)
        return None if res is None else res[0]
    if method == "fm":
        rows = list(constraints)
        for j in range(nvars):
            e = [0] * nvars
            e[j] = 1
            rows.append((e, ">=", 0))
        return fourier_motzkin(rows, nvars)
    raise ValueError(f"unknown feasibility method {method!r}")


def _prefer_positive(pt, rows, nvars: int):
    """Replace a sample on the orthant boundary by a positive one when the cell allows it."""
    if pt is None or all(x > 0 for x in pt):
        return pt
    strict = list(rows) + [([int(k == j) for k in range(nvars)], ">", 0) for j in range(nvars)]
    better = feasible_point(strict, nvars)
    return pt if better is None else better


def _j0_of(walls: Sequence[Wall], j0: int | None) -> int:
    if j0 is not None:
        return j0
    if not walls:
        raise ValueError("j0 must be given when there are no walls")
    return len(walls[0].normal)


def enumerate_chambers(
    walls: Sequence[Wall],
    region: str = "full",
    j0: int | None = None,
    method: str = "simplex",
) -> list[Chamber]:
    """All realized sign vectors on the simplex ``sum sigma = 1`` within ``region``.

    Depth-first over the walls.  The parent's witness already realizes one
    child sign; a wall that misses the parent face is detected by a single
    infeasible test of its zero sign.
    """
    j0 = _j0_of(walls, j0)
    base = _region_constraints(j0, region)
    out: list[Chamber] = []

    def feasible(prefix):
        return feasible_point(base + _sign_rows(walls, prefix), j0, method)

    def dfs(prefix: list[int], pt):
        k = len(prefix)
        if k == len(walls):
            rows = base + _sign_rows(walls, prefix)
            pt = _prefer_positive(pt, rows, j0)
            if not satisfies(pt, rows):
                raise AssertionError("chamber witness failed re-verification")
            out.append(Chamber(tuple(prefix), tuple(pt), all(s != 0 for s in prefix)))
            return
        s0 = sign(walls[k].value(pt))
        children = {s0: pt}
        if s0 != 0:
            zero = feasible(prefix + [0])
            if zero is not None:
                children[0] = zero
                other = feasible(prefix + [-s0])
                if other is not None:
                    children[-s0] = other
        else:
            for s in (1, -1):
                q = feasible(prefix + [s])
                if q is not None:
                    children[s] = q
        for s in (1, 0, -1):
            if s in children:
                dfs(prefix + [s], children[s])

    root = feasible([])
    if root is not None:
        dfs([], root)
    return out


def locate(sigma, walls: Sequence[Wall]) -> tuple[int, ...]:
    """Exact sign of every wall form at ``sigma`` (entries may be irrational)."""
    sigma = as_sigma(sigma)
    return tuple(sign(w.value(sigma)) for w in walls)


def rational_representative(
    signs: Sequence[int], walls: Sequence[Wall], region: str = "full", j0: int | None = None
) -> StabilityParameter:
    """A rational parameter with the given sign vector, normalized to sum 1."""
    j0 = _j0_of(walls, j0)
    if len(signs) != len(walls):
        raise ValueError("sign vector length differs from the wall count")
    rows = constraints_for(walls, signs, j0, region)
    pt = _prefer_positive(feasible_point(rows, j0), rows, j0)
    if pt is None:
        raise InfeasibleError(f"sign vector {tuple(signs)} is not realized")
    return StabilityParameter(tuple(pt))


def sample_points(
    chamber: Chamber | Sequence[int],
    walls: Sequence[Wall],
    k: int = 10,
    rng: random.Random | None = None,
    region: str = "full",
    j0: int | None = None,
) -> list[tuple[Fraction, ...]]:
    """``k`` rational points with the chamber's sign vector.

    Each point is the max-margin centre moved along a random direction of the
    chamber's affine span, with the step halved until every row holds.
    """
    rng = rng or random.Random(0)
    signs = chamber.signs if isinstance(chamber, Chamber) else tuple(chamber)
    j0 = _j0_of(walls, j0)
    rows = constraints_for(walls, signs, j0, region)
    # prefer a centre off the coordinate hyperplanes; otherwise stay on them
    res = max_margin(constraints_for(walls, signs, j0, "positive"), j0, nonneg=True)
    frozen: list[int] = []
    if res is None:
        res = max_margin(rows, j0, nonneg=True)
        if res is None:
            raise InfeasibleError(f"sign vector {signs} is not realized")
        frozen = [j for j, x in enumerate(res[0]) if x == 0]
    centre, margin = res
    eq = [[Fraction(x) for x in a] for a, rel, _ in rows if rel == "="]
    eq += [[Fraction(int(i == j)) for i in range(j0)] for j in frozen]
    span = linalg.nullspace(eq) if eq else linalg.identity(j0)

    def ok(p):
        return all(x >= 0 for x in p) and satisfies(p, rows)

    pts = []
    while len(pts) < k:
        if not span:
            pts.append(tuple(centre))
            continue
        direction = [Fraction(0)] * j0
        for v in span:
            c = rng.randint(-5, 5)
            direction = [d + c * x for d, x in zip(direction, v)]
        # a step this small keeps every strict row above half the margin
        bound = max(abs(Fraction(x)) for a, _, _ in rows for x in a) or Fraction(1)
        size = sum(abs(d) for d in direction) or Fraction(1)
        step = margin / (2 * bound * size) * Fraction(rng.randint(1, 4), 4) if margin else Fraction(1)
        for _ in range(48):
            p = tuple(x + step * d for x, d in zip(centre, direction))
            if ok(p):
                pts.append(p)
                break
            step /= 2
    return pts
