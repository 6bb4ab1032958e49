"""Semistable-set traces of sample representations along a segment in sigma-space.

Along ``sigma(t) = (1-t) start + t end`` the sign of ``theta_sigma(M')`` for a
fixed submodule dimension vector is the sign of a quadratic in ``t``, so
verdicts are piecewise constant.  Change points are located by bisection and,
for exhaustive checks, matched against the exact roots of those quadratics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .chambers import Wall, canonical_normal
from .exact import QuadNumber, format_scalar, sign, simplify, sqrt_bounds
from .quiver import (
    DEFAULT_CAP,
    DimVector,
    Representation,
    character_of,
    semistability_check,
    submodule_dimvecs,
    theta_of,
)
from .sheaf import as_sigma

RESOLUTION = Fraction(1, 1 << 20)


# ----------------------------------------------------------------------
# exact reals from several quadratic fields


def _bracket(x, bits: int) -> tuple[Fraction, Fraction]:
    if isinstance(x, QuadNumber) and x.b != 0:
        lo, hi = sqrt_bounds(x.d, bits)
        a, b = x.a + x.b * lo, x.a + x.b * hi
        return (a, b) if a <= b else (b, a)
    x = simplify(x)
    return x, x


def compare_real(x, y) -> int:
    """Exact sign of ``x - y`` for rationals or elements of possibly different Q(sqrt d)."""
    x, y = simplify(x), simplify(y)
    dx = x.d if isinstance(x, QuadNumber) else None
    dy = y.d if isinstance(y, QuadNumber) else None
    if dx is None or dy is None or dx == dy:
        return sign(x - y)
    # distinct quadratic fields: irrational elements never coincide
    bits = 32
    while True:
        xl, xh = _bracket(x, bits)
        yl, yh = _bracket(y, bits)
        if xh < yl:
            return -1
        if yh < xl:
            return 1
        bits *= 2


def _squarefree_split(n: int) -> tuple[int, int]:
    """``n = s^2 f`` with ``f`` square-free; returns ``(s, f)``."""
    s, f, p = 1, 1, 2
    while p * p <= n:
        while n % (p * p) == 0:
            n //= p * p
            s *= p
        if n % p == 0:
            n //= p
            f *= p
        p += 1
    return s, f * n


def exact_sqrt(x: Fraction):
    """``sqrt(x)`` for rational ``x >= 0`` as a Fraction or QuadNumber."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("negative radicand")
    if x == 0:
        return Fraction(0)
    s, f = _squarefree_split(x.numerator * x.denominator)
    coef = Fraction(s, x.denominator)
    if f == 1:
        return coef
    return QuadNumber(0, coef, f)


def quadratic_roots(c0: Fraction, c1: Fraction, c2: Fraction) -> list:
    """Real roots of ``c0 + c1 t + c2 t^2`` (not identically zero)."""
    if c2 == 0:
        if c1 == 0:
            return []
        return [Fraction(-c0) / c1]
    disc = c1 * c1 - 4 * c2 * c0
    if disc < 0:
        return []
    r = exact_sqrt(disc)
    roots = {format_scalar(simplify((-c1 + s * r) / (2 * c2))): simplify((-c1 + s * r) / (2 * c2)) for s in (1, -1)}
    return list(roots.values())


# ----------------------------------------------------------------------
# path helpers


def path_point(start, end, t) -> tuple:
    return tuple(simplify(a + t * (b - a)) for a, b in zip(start, end))


def theta_quadratic(start, end, d: DimVector, sub: DimVector) -> tuple[Fraction, Fraction, Fraction]:
    """Coefficients of a quadratic in ``t`` with the sign of ``theta_{sigma(t)}(sub)``."""
    delta = [b - a for a, b in zip(start, end)]

    def lin(xs):
        return (
            sum((Fraction(s) * x for s, x in zip(start, xs)), Fraction(0)),
            sum((Fraction(s) * x for s, x in zip(delta, xs)), Fraction(0)),
        )

    a1, b1 = lin(d.v)
    a2, b2 = lin(d.w)
    av, bv = lin(sub.v)
    aw, bw = lin(sub.w)
    c0 = a2 * av - a1 * aw
    c1 = a2 * bv + b2 * av - a1 * bw - b1 * aw
    c2 = b2 * bv - b1 * bw
    return c0, c1, c2


def critical_points(start, end, d: DimVector, subs: Sequence[DimVector]) -> list:
    """Exact ``t`` in ``(0, 1)`` where some ``theta(sub)`` vanishes and changes or touches zero."""
    found: dict[str, object] = {}
    for sub in subs:
        c = theta_quadratic(start, end, d, sub)
        if all(x == 0 for x in c):
            continue
        for r in quadratic_roots(*c):
            if compare_real(r, 0) > 0 and compare_real(r, 1) < 0:
                found[format_scalar(r)] = r
    out = list(found.values())
    _sort_real(out)
    return out


def _sort_real(xs: list) -> None:
    import functools

    xs.sort(key=functools.cmp_to_key(compare_real))


def module_walls(d, subs: Sequence) -> list[Wall]:
    """Linear walls ``sum d_w * v' - sum d_v * w'`` for a rank-proportional dimension vector.

    When ``d_v`` and ``d_w`` are proportional, ``theta_sigma(sub)`` has the
    sign of this linear form; otherwise the walls are quadrics and a
    ValueError is raised.
    """
    d = d if isinstance(d, DimVector) else DimVector(tuple(d))
    sv, sw = sum(d.v), sum(d.w)
    if any(x * sw != y * sv for x, y in zip(d.v, d.w)):
        raise ValueError("V- and W-dimensions are not proportional; walls are quadrics")
    walls: dict[tuple, list] = {}
    for sub in subs:
        sub = sub if isinstance(sub, DimVector) else DimVector(tuple(sub))
        form = [sw * a - sv * b for a, b in zip(sub.v, sub.w)]
        n = canonical_normal(form)
        if n is None or all(x > 0 for x in n) or all(x < 0 for x in n):
            continue
        walls.setdefault(n, []).append((0, "".join(map(str, sub.d)), "module"))
    return [Wall(n, tuple(o)) for n, o in walls.items()]


def wall_crossing(wall: Wall, start, end):
    """``t`` with ``wall(sigma(t)) = 0``, or None when the wall is parallel to the path."""
    a = wall.value(start)
    b = simplify(wall.value(end) - a)
    if sign(b) == 0:
        return None
    return simplify(-a / b)


# ----------------------------------------------------------------------
# the scan


@dataclass(frozen=True)
class Event:
    t_from: object
    t_to: object
    semistable: tuple[str, ...]
    rechecked: bool

    def to_json(self) -> dict:
        return {
            "t_from": format_scalar(self.t_from),
            "t_to": format_scalar(self.t_to),
            "semistable": list(self.semistable),
            "rechecked": self.rechecked,
        }


@dataclass(frozen=True)
class Flip:
    t_lo: Fraction
    t_hi: Fraction
    t0: object  # exact crossing or None
    sigma_minus: tuple
    sigma_zero: tuple
    sigma_plus: tuple
    ss_minus: tuple[str, ...]
    ss_zero: tuple[str, ...]
    ss_plus: tuple[str, ...]
    kind: str = "flip"  # "flip" or "wall" (set changes only on the wall itself)

    @property
    def gained(self) -> tuple[str, ...]:
        return tuple(x for x in self.ss_plus if x not in self.ss_minus)

    @property
    def lost(self) -> tuple[str, ...]:
        return tuple(x for x in self.ss_minus if x not in self.ss_plus)

    @property
    def inclusion(self) -> bool:
        """Whether every sample semistable on either side is semistable on the wall."""
        return set(self.ss_minus) | set(self.ss_plus) <= set(self.ss_zero)

    def to_json(self) -> dict:
        def pt(s):
            return [format_scalar(x) for x in s]

        return {
            "kind": self.kind,
            "t_interval": [format_scalar(self.t_lo), format_scalar(self.t_hi)],
            "t0": None if self.t0 is None else format_scalar(self.t0),
            "sigma_minus": pt(self.sigma_minus),
            "sigma_zero": pt(self.sigma_zero),
            "sigma_plus": pt(self.sigma_plus),
            "gained": list(self.gained),
            "lost": list(self.lost),
            "semistable_on_wall": list(self.ss_zero),
            "inclusion_holds": self.inclusion,
        }


@dataclass
class ScanTrace:
    start: tuple
    end: tuple
    steps: int
    path: list
    events: list[Event]
    flips: list[Flip]
    definitive: bool
    resolution: Fraction = RESOLUTION
    characters: list = field(default_factory=list)

    def boundaries(self) -> list[tuple[Fraction, Fraction]]:
        return [(f.t_lo, f.t_hi) for f in self.flips if f.kind == "flip"]

    def to_json(self) -> dict:
        return {
            "start": [format_scalar(x) for x in self.start],
            "end": [format_scalar(x) for x in self.end],
            "steps": self.steps,
            "resolution": str(self.resolution),
            "definitive": self.definitive,
            "path": [[format_scalar(x) for x in p] for p in self.path],
            "events": [e.to_json() for e in self.events],
            "flips": [f.to_json() for f in self.flips],
            "characters": self.characters,
        }


class _Oracle:
    """Memoized per-sample verdicts along the path."""

    def __init__(self, samples, start, end, strategy, seed, trials, cap):
        self.samples, self.start, self.end = samples, start, end
        self.kw = dict(strategy=strategy, seed=seed, trials=trials, cap=cap)
        self.memo: dict = {}
        self.definitive = True

    def semistable(self, k: int, t) -> bool:
        key = (k, format_scalar(t))
        if key not in self.memo:
            v = semistability_check(self.samples[k], path_point(self.start, self.end, t), **self.kw)
            self.definitive &= v.definitive
            self.memo[key] = v.kind != "Unstable"
        return self.memo[key]

    def ss_set(self, t) -> tuple[str, ...]:
        return tuple(s.label for k, s in enumerate(self.samples) if self.semistable(k, t))


def _validate(samples: Sequence[Representation], start, end):
    if not samples:
        raise ValueError("need at least one sample")
    first = samples[0]
    labels = [s.label for s in samples]
    if len(set(labels)) != len(labels) or any(not x for x in labels):
        raise ValueError("samples need distinct non-empty labels")
    for s in samples[1:]:
        if s.quiver != first.quiver or tuple(s.dims) != tuple(first.dims) or s.ops != first.ops:
            raise ValueError("samples must share quiver, dimension vector and field")
    for p in (start, end):
        if len(p) != first.j0:
            raise ValueError(f"path endpoints need {first.j0} entries")
        if any(sign(x) <= 0 for x in p):
            raise ValueError("path parameters must be strictly positive")


def sigma_scan(
    samples: Sequence[Representation],
    start,
    end,
    steps: int = 16,
    strategy: str = "auto",
    seed: int = 0,
    trials: int = 64,
    cap: int = DEFAULT_CAP,
    resolution: Fraction = RESOLUTION,
) -> ScanTrace:
    start = tuple(as_sigma(start).sigma)
    end = tuple(as_sigma(end).sigma)
    _validate(samples, start, end)
    if steps < 1:
        raise ValueError("steps must be positive")
    if any(isinstance(x, QuadNumber) for x in start + end):
        raise ValueError("path endpoints must be rational")
    oracle = _Oracle(samples, start, end, strategy, seed, trials, cap)
    d = samples[0].dims
    chars = character_path(start, end, steps, d)
    if start == end:
        path = [start]
        ss = oracle.ss_set(Fraction(0))
        return ScanTrace(start, end, steps, path, [Event(Fraction(0), Fraction(0), ss, True)], [], oracle.definitive,
                         resolution, chars)
    ts = [Fraction(k, steps) for k in range(steps + 1)]
    path = [path_point(start, end, t) for t in ts]

    # bisection per sample and grid cell
    intervals = []
    for k in range(len(samples)):
        for a, b in zip(ts, ts[1:]):
            if oracle.semistable(k, a) == oracle.semistable(k, b):
                continue
            lo, hi = a, b
            va = oracle.semistable(k, lo)
            while hi - lo > resolution:
                mid = (lo + hi) / 2
                if oracle.semistable(k, mid) == va:
                    lo = mid
                else:
                    hi = mid
            intervals.append((lo, hi))
    intervals.sort()
    merged: list[list[Fraction]] = []
    for lo, hi in intervals:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])

    exhaustive = oracle.definitive and samples[0].finite and strategy in ("auto", "exhaustive")
    roots = []
    if exhaustive:
        subs = {tuple(x) for s in samples for x in submodule_dimvecs(s, cap)}
        roots = critical_points(start, end, d, [DimVector(x) for x in sorted(subs)])

    flips: list[Flip] = []
    used = set()
    for lo, hi in merged:
        inside = [r for r in roots if compare_real(r, lo) >= 0 and compare_real(r, hi) <= 0]
        t0 = inside[0] if inside else None
        for r in inside:
            used.add(format_scalar(r))
        tz = t0 if t0 is not None else (lo + hi) / 2
        flips.append(
            Flip(lo, hi, t0, path_point(start, end, lo), path_point(start, end, tz), path_point(start, end, hi),
                 oracle.ss_set(lo), oracle.ss_set(tz), oracle.ss_set(hi))
        )
    # walls where the set changes only on the wall itself
    for r in roots:
        if format_scalar(r) in used:
            continue
        lo_b, hi_b = _bracket(r, 64)
        lo = Fraction(math.floor((lo_b - resolution) / resolution)) * resolution
        hi = Fraction(math.ceil((hi_b + resolution) / resolution)) * resolution
        lo, hi = max(lo, Fraction(0)), min(hi, Fraction(1))
        s_lo, s_0, s_hi = oracle.ss_set(lo), oracle.ss_set(r), oracle.ss_set(hi)
        if s_0 != s_lo or s_0 != s_hi:
            flips.append(
                Flip(lo, hi, r, path_point(start, end, lo), path_point(start, end, r), path_point(start, end, hi),
                     s_lo, s_0, s_hi, kind="wall" if s_lo == s_hi else "flip")
            )
    flips.sort(key=lambda f: (f.t_lo, f.t_hi))

    # events: cells between consecutive set-changing flips, rechecked at three interior points
    events: list[Event] = []
    cuts = [(f.t_lo, f.t_hi) for f in flips if f.kind == "flip"]
    edges = [Fraction(0)] + [x for c in cuts for x in c] + [Fraction(1)]
    for a, b in zip(edges[0::2], edges[1::2]):
        ss = oracle.ss_set(a)
        probes = [a + (b - a) * Fraction(k, 4) for k in (1, 2, 3)]
        on_wall = {format_scalar(r) for r in roots}
        ok = all(oracle.ss_set(p) == ss for p in probes if format_scalar(p) not in on_wall)
        ok = ok and oracle.ss_set(b) == ss
        events.append(Event(a, b, ss, ok))
    return ScanTrace(start, end, steps, path, events, flips, oracle.definitive, resolution, chars)


def audit_boundaries(trace: ScanTrace, walls: Sequence[Wall]) -> list[tuple[tuple[Fraction, Fraction], object]]:
    """For each set-changing boundary, the wall crossing within one resolution unit (or None)."""
    crossings = [c for c in (wall_crossing(w, trace.start, trace.end) for w in walls) if c is not None]
    out = []
    for lo, hi in trace.boundaries():
        hit = None
        for c in crossings:
            if compare_real(c, lo - trace.resolution) >= 0 and compare_real(c, hi + trace.resolution) <= 0:
                hit = c
                break
        out.append(((lo, hi), hit))
    return out


def character_path(start, end, steps: int, d) -> list[dict]:
    """Exponents of ``chi_theta`` at ``steps + 1`` equally spaced points, with the ``theta . d = 0`` audit."""
    d = d if isinstance(d, DimVector) else DimVector(tuple(d))
    start = tuple(as_sigma(start).sigma)
    end = tuple(as_sigma(end).sigma)
    out = []
    for k in range(steps + 1):
        sigma = path_point(start, end, Fraction(k, steps))
        ex = character_of(sigma, d)
        audit = sign(theta_of(d, [-x for x in ex])) == 0
        out.append({"sigma": [format_scalar(x) for x in sigma], "exponents": [format_scalar(x) for x in ex], "pairs_to_zero": audit})
    return out
