"""Univariate polynomials over an exact field with the eventual order.

``p <= q`` means ``p(m) <= q(m)`` for all sufficiently large ``m``, which
is the lexicographic order on coefficient vectors read from the top degree.
"""
from __future__ import annotations

import enum
from fractions import Fraction
from typing import Iterable, Sequence

from .exact import (
    QQ,
    Field,
    FieldMismatchError,
    ceil_scalar,
    common_field,
    format_scalar,
    join_fields,
    parse_scalar,
    sign,
    simplify,
)


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1

    @classmethod
    def from_sign(cls, s: int) -> Ordering:
        return cls(s)


class Poly:
    """Immutable polynomial; ``coeffs[i]`` is the coefficient of ``m**i``."""

    __slots__ = ("coeffs", "field")

    def __init__(self, coeffs: Iterable = (), field: Field | None = None):
        cs = [simplify(parse_scalar(c) if isinstance(c, str) else c) for c in coeffs]
        inferred = common_field(cs)
        if field is None:
            field = inferred
        elif not all(field.contains(c) for c in cs):
            raise FieldMismatchError(f"coefficients not in {field.name}")
        cs = [c if field is QQ else field.coerce(c) for c in cs]
        cs = [simplify(c) for c in cs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple = tuple(cs)
        self.field: Field = field

    # -- basics ---------------------------------------------------------
    @classmethod
    def monomial(cls, i: int, c=1, field: Field | None = None) -> Poly:
        return cls([0] * i + [c], field)

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def lead(self):
        if not self.coeffs:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def coeff(self, i: int):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def _check(self, other: Poly) -> Field:
        if not isinstance(other, Poly):
            raise TypeError(f"expected Poly, got {type(other).__name__}")
        if self.field != other.field:
            raise FieldMismatchError(
                f"polynomials over {self.field.name} and {other.field.name}"
            )
        return self.field

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.field == other.field and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.coeffs, self.field))

    def __add__(self, other: Poly) -> Poly:
        f = self._check(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly([self.coeff(i) + other.coeff(i) for i in range(n)], f)

    def __neg__(self) -> Poly:
        return Poly([-c for c in self.coeffs], self.field)

    def __sub__(self, other: Poly) -> Poly:
        return self + (-other)

    def __mul__(self, other) -> Poly:
        if isinstance(other, Poly):
            f = self._check(other)
            if self.is_zero() or other.is_zero():
                return Poly([], f)
            out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                for j, b in enumerate(other.coeffs):
                    out[i + j] = out[i + j] + a * b
            return Poly(out, f)
        f = join_fields(self.field, common_field([other]))
        return Poly([c * other for c in self.coeffs], f)

    __rmul__ = __mul__

    def __truediv__(self, c) -> Poly:
        if c == 0:
            raise ZeroDivisionError("polynomial divided by zero")
        f = join_fields(self.field, common_field([c]))
        return Poly([x / c for x in self.coeffs], f)

    def lift(self, field: Field) -> Poly:
        """The same polynomial viewed over a larger field."""
        return Poly(self.coeffs, join_fields(self.field, field))

    def __call__(self, m):
        return poly_eval(self, m)

    def compose_scale(self, t) -> Poly:
        """The polynomial ``m -> p(t*m)``."""
        f = join_fields(self.field, common_field([t]))
        return Poly([c * t**i for i, c in enumerate(self.coeffs)], f)

    def __repr__(self):
        return f"Poly([{', '.join(format_scalar(c) for c in self.coeffs)}])"

    def to_json(self) -> list[str]:
        return [format_scalar(c) for c in self.coeffs]


def poly_eval(p: Poly, m):
    """Exact Horner evaluation."""
    join_fields(p.field, common_field([m]))
    acc = Fraction(0)
    for c in reversed(p.coeffs):
        acc = acc * m + c
    return simplify(acc)


def poly_compare(p: Poly, q: Poly) -> Ordering:
    """Eventual ordering of ``p`` and ``q``."""
    p._check(q)
    diff = p - q
    if diff.is_zero():
        return Ordering.EQUAL
    return Ordering.from_sign(sign(diff.lead))


def eventual_sign_threshold(p: Poly) -> int:
    """Smallest ``m0 >= 0`` with ``sign p(m) == sign(lead)`` for every integer ``m >= m0``.

    Starts from the Cauchy root bound and scans downward.
    """
    if p.is_zero():
        raise ValueError("zero polynomial has no eventual sign")
    lead = p.lead
    s = sign(lead)
    if p.degree == 0:
        return 0
    ratio = max(abs(c) / abs(lead) for c in p.coeffs[:-1])
    m0 = ceil_scalar(1 + ratio)
    while m0 > 0 and sign(poly_eval(p, m0 - 1)) == s:
        m0 -= 1
    return m0


def hilbert_basis_poly(alpha: Sequence, field: Field | None = None) -> Poly:
    """``sum_i alpha[i] * m**i / i!`` as a polynomial in the monomial basis."""
    import math

    return Poly([Fraction(1, math.factorial(i)) * a for i, a in enumerate(alpha)], field)
