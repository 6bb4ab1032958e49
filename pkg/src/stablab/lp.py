"""Exact linear feasibility: a rational simplex method and Fourier-Motzkin elimination.

Constraints are triples ``(coeffs, rel, rhs)`` meaning ``coeffs . x rel rhs``
with ``rel`` one of ``">", ">=", "=", "<=", "<"``.  All coefficients are
rationals; all variables are free.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

Constraint = tuple[Sequence, str, object]

_RELS = {">", ">=", "=", "<=", "<"}


def _normalize(constraints: Sequence[Constraint], nvars: int):
    """Split into equalities ``a.x = b`` and inequalities ``a.x >= b`` (strict flag)."""
    eqs, ineqs = [], []
    for a, rel, b in constraints:
        if rel not in _RELS:
            raise ValueError(f"unknown relation {rel!r}")
        a = [Fraction(x) for x in a]
        if len(a) != nvars:
            raise ValueError(f"constraint has {len(a)} coefficients, expected {nvars}")
        b = Fraction(b)
        if rel == "=":
            eqs.append((a, b))
        elif rel in (">", ">="):
            ineqs.append((a, b, rel == ">"))
        else:
            ineqs.append(([-x for x in a], -b, rel == "<"))
    return eqs, ineqs


# ----------------------------------------------------------------------
# simplex


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: list | None = None
    value: Fraction | None = None


def _pivot(T: list[list[Fraction]], basis: list[int], r: int, c: int) -> None:
    inv = 1 / T[r][c]
    Tr = [v * inv if v else v for v in T[r]]
    T[r] = Tr
    nz = [j for j, v in enumerate(Tr) if v]
    for i in range(len(T)):
        if i != r:
            Ti = T[i]
            f = Ti[c]
            if f:
                for j in nz:
                    Ti[j] = Ti[j] - f * Tr[j]
    basis[r] = c


def _simplex_phase(T, basis, obj_row: int, allowed: int) -> str:
    """Maximize the objective stored as ``-c`` in row ``obj_row`` (Bland's rule)."""
    m = obj_row
    while True:
        col = next((j for j in range(allowed) if T[m][j] < 0), None)
        if col is None:
            return "optimal"
        best = None
        for i in range(m):
            if T[i][col] > 0:
                ratio = T[i][-1] / T[i][col]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return "unbounded"
        _pivot(T, basis, best[1], col)


def linprog_exact(
    c: Sequence,
    constraints: Sequence[Constraint],
    nvars: int,
    nonneg: bool = False,
) -> LPResult:
    """Maximize ``c . x`` subject to non-strict constraints.

    Variables are free unless ``nonneg`` is set.  Rows whose slack can start
    in the basis get no artificial variable.
    """
    eqs, ineqs = _normalize(constraints, nvars)
    if any(strict for _, _, strict in ineqs):
        raise ValueError("linprog_exact takes non-strict constraints only")
    nx = nvars if nonneg else 2 * nvars

    def expand(a):
        return list(a) if nonneg else list(a) + [-x for x in a]

    # every inequality as  a.x <= b  (from a.x >= b by negation)
    le = [([-x for x in expand(a)], -b) for a, b, _ in ineqs]
    eq = [(expand(a), b) for a, b in eqs]
    nslack = len(le)
    rows, basis, need_art = [], [], []
    for k, (a, b) in enumerate(le):
        slack = [Fraction(0)] * nslack
        if b >= 0:
            slack[k] = Fraction(1)
            rows.append((a + slack, b))
            basis.append(nx + k)
        else:
            slack[k] = Fraction(-1)
            rows.append(([-x for x in a] + slack, -b))
            basis.append(None)
    for a, b in eq:
        row = a + [Fraction(0)] * nslack
        if b < 0:
            row, b = [-x for x in row], -b
        rows.append((row, b))
        basis.append(None)
    nstruct = nx + nslack
    art_rows = [i for i, bc in enumerate(basis) if bc is None]
    nart = len(art_rows)
    m = len(rows)
    T = []
    for i, (a, b) in enumerate(rows):
        art = [Fraction(0)] * nart
        if basis[i] is None:
            k = art_rows.index(i)
            art[k] = Fraction(1)
            basis[i] = nstruct + k
        T.append(list(a) + art + [b])
    width = nstruct + nart
    if nart:
        obj = [Fraction(0)] * (width + 1)
        for i in art_rows:
            obj = [o - t for o, t in zip(obj, T[i])]
        for k in range(nart):
            obj[nstruct + k] = Fraction(0)
        T.append(obj)
        _simplex_phase(T, basis, m, width)
        if T[m][-1] != 0:
            return LPResult("infeasible")
        T.pop()
        for i in range(m):
            if basis[i] >= nstruct:
                col = next((j for j in range(nstruct) if T[i][j] != 0), None)
                if col is not None:
                    _pivot(T, basis, i, col)
    keep = [i for i in range(m) if basis[i] < nstruct]
    T2 = [T[i][:nstruct] + [T[i][-1]] for i in keep]
    basis2 = [basis[i] for i in keep]
    cfull = expand([Fraction(x) for x in c]) + [Fraction(0)] * nslack
    objrow = [-x for x in cfull] + [Fraction(0)]
    for i, bcol in enumerate(basis2):
        coef = objrow[bcol]
        if coef != 0:
            objrow = [o - coef * t for o, t in zip(objrow, T2[i])]
    T2.append(objrow)
    status = _simplex_phase(T2, basis2, len(T2) - 1, nstruct)
    if status == "unbounded":
        return LPResult("unbounded")
    sol = [Fraction(0)] * nstruct
    for i, bcol in enumerate(basis2):
        sol[bcol] = T2[i][-1]
    x = sol[:nvars] if nonneg else [sol[j] - sol[nvars + j] for j in range(nvars)]
    value = sum((Fraction(ci) * xi for ci, xi in zip(c, x)), Fraction(0))
    return LPResult("optimal", x, value)


def _check(point: Sequence, constraints: Sequence[Constraint]) -> bool:
    for a, rel, b in constraints:
        v = sum((Fraction(ai) * xi for ai, xi in zip(a, point)), Fraction(0))
        ok = {
            ">": v > b,
            ">=": v >= b,
            "=": v == b,
            "<=": v <= b,
            "<": v < b,
        }[rel]
        if not ok:
            return False
    return True


satisfies = _check


def max_margin(constraints: Sequence[Constraint], nvars: int, nonneg: bool = False):
    """Point maximizing the slack on strict rows (capped at 1).

    Returns ``(x, margin)``; ``None`` when infeasible or when a strict row
    cannot be satisfied strictly.
    """
    eqs, ineqs = _normalize(constraints, nvars)
    n = nvars + 1  # last variable is the margin t
    rows: list[Constraint] = []
    for a, b in eqs:
        rows.append((a + [0], "=", b))
    for a, b, strict in ineqs:
        rows.append((a + [-1 if strict else 0], ">=", b))
    rows.append(([0] * nvars + [1], "<=", 1))
    rows.append(([0] * nvars + [1], ">=", 0))
    res = linprog_exact([0] * nvars + [1], rows, n, nonneg=nonneg)
    if res.status != "optimal":
        return None
    t = res.x[-1]
    if t <= 0 and any(s for _, _, s in ineqs):
        return None
    return res.x[:-1], t


def tightened(constraints: Sequence[Constraint], margin) -> list[Constraint]:
    """Replace strict rows by non-strict rows with the given slack."""
    out: list[Constraint] = []
    for a, rel, b in constraints:
        if rel == ">":
            out.append((a, ">=", Fraction(b) + margin))
        elif rel == "<":
            out.append((a, "<=", Fraction(b) - margin))
        else:
            out.append((a, rel, b))
    return out


# ----------------------------------------------------------------------
# Fourier-Motzkin


def _scale_key(a: list[Fraction], b: Fraction):
    s = max(abs(x) for x in a)
    return tuple(x / s for x in a), b / s


def _prune(ineqs):
    best: dict = {}
    trivial = []
    for a, b, strict in ineqs:
        if all(x == 0 for x in a):
            trivial.append((b, strict))
            continue
        key, bb = _scale_key(a, b)
        cur = best.get(key)
        if cur is None or bb > cur[0] or (bb == cur[0] and strict and not cur[1]):
            best[key] = (bb, strict)
    out = [(list(k), b, s) for k, (b, s) in best.items()]
    return out, trivial


def fourier_motzkin(constraints: Sequence[Constraint], nvars: int) -> list | None:
    """Feasibility by Fourier-Motzkin elimination; returns a witness point or None.

    The witness sits strictly inside every strict constraint (back-substitution
    picks midpoints of the admissible intervals).
    """
    eqs, ineqs = _normalize(constraints, nvars)
    # eliminate equalities by substitution: x_k = (b - sum_{j != k} a_j x_j) / a_k
    subs: list[tuple[int, list[Fraction], Fraction]] = []
    eqs = [list(e) for e in eqs]
    while eqs:
        a, b = eqs.pop()
        k = next((j for j, x in enumerate(a) if x != 0), None)
        if k is None:
            if b != 0:
                return None
            continue
        expr = [-x / a[k] for x in a]
        expr[k] = Fraction(0)
        const = b / a[k]
        subs.append((k, expr, const))

        def sub(row, rhs):
            ck = row[k]
            if ck == 0:
                return row, rhs
            new = [r + ck * e for r, e in zip(row, expr)]
            new[k] = Fraction(0)
            return new, rhs - ck * const

        eqs = [list(sub(r, rr)) for r, rr in eqs]
        ineqs = [(*sub(r, rr), s) for r, rr, s in ineqs]

    eliminated = {k for k, _, _ in subs}
    order = [j for j in range(nvars) if j not in eliminated]
    history: list[tuple[int, list]] = []
    ineqs, trivial = _prune(ineqs)
    for b, strict in trivial:
        if (strict and not 0 > b) or (not strict and not 0 >= b):
            return None
    for k in order:
        pos = [q for q in ineqs if q[0][k] > 0]
        neg = [q for q in ineqs if q[0][k] < 0]
        rest = [q for q in ineqs if q[0][k] == 0]
        history.append((k, pos + neg))
        new = list(rest)
        for ap, bp, sp in pos:
            for an, bn, sn in neg:
                lp, ln = -an[k], ap[k]
                a = [lp * x + ln * y for x, y in zip(ap, an)]
                a[k] = Fraction(0)
                new.append((a, lp * bp + ln * bn, sp or sn))
        ineqs, trivial = _prune(new)
        for b, strict in trivial:
            if (strict and not 0 > b) or (not strict and not 0 >= b):
                return None
    # back-substitution
    x = [Fraction(0)] * nvars
    for k, bounds in reversed(history):
        lo = hi = None
        lo_strict = hi_strict = False
        for a, b, strict in bounds:
            rest = sum((a[j] * x[j] for j in range(nvars) if j != k), Fraction(0))
            val = (b - rest) / a[k]
            if a[k] > 0:
                if lo is None or val > lo or (val == lo and strict):
                    lo, lo_strict = val, strict
            else:
                if hi is None or val < hi or (val == hi and strict):
                    hi, hi_strict = val, strict
        if lo is not None and hi is not None:
            if lo > hi or (lo == hi and (lo_strict or hi_strict)):
                return None
            x[k] = (lo + hi) / 2
        elif lo is not None:
            x[k] = lo + 1 if lo_strict else lo
        elif hi is not None:
            x[k] = hi - 1 if hi_strict else hi
        else:
            x[k] = Fraction(0)
    for k, expr, const in reversed(subs):
        x[k] = const + sum((e * x[j] for j, e in enumerate(expr)), Fraction(0))
    if not _check(x, constraints):
        raise AssertionError("Fourier-Motzkin witness failed re-verification")
    return x
