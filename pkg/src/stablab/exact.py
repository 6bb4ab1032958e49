"""Exact ordered scalar fields: the rationals and real quadratic extensions.

Rationals are plain :class:`fractions.Fraction` values.  Elements of
``Q(sqrt d)`` are :class:`QuadNumber` instances.  A rational number is a
valid element of every quadratic extension, so arithmetic between a
``Fraction`` and a ``QuadNumber`` is allowed; arithmetic between two
different extensions is not.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Scalar = Union[int, Fraction, "QuadNumber"]


class FieldMismatchError(ValueError):
    """Raised when operands live in incompatible fields."""


def _squarefree(d: int) -> bool:
    if d < 2:
        return False
    k = 2
    while k * k <= d:
        if d % (k * k) == 0:
            return False
        k += 1
    return True


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"not a rational scalar: {x!r}")


class QuadNumber:
    """The number ``a + b*sqrt(d)`` with rational ``a``, ``b``."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b=0, d: int = 2):
        if not _squarefree(d):
            raise ValueError(f"d must be a square-free integer > 1, got {d}")
        self.a = _frac(a)
        self.b = _frac(b)
        self.d = d

    # -- coercion -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, QuadNumber):
            if other.d != self.d:
                raise FieldMismatchError(f"Q(sqrt {self.d}) vs Q(sqrt {other.d})")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadNumber(other, 0, self.d)
        return NotImplemented

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def conjugate(self) -> QuadNumber:
        return QuadNumber(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.d

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadNumber(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadNumber(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadNumber(self.a - o.a, self.b - o.b, self.d)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadNumber(
            self.a * o.a + self.b * o.b * self.d, self.a * o.b + self.b * o.a, self.d
        )

    __rmul__ = __mul__

    def inverse(self) -> QuadNumber:
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt d)")
        return QuadNumber(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out = QuadNumber(1, 0, self.d)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- order ----------------------------------------------------------
    def sign(self) -> int:
        a, b = self.a, self.b
        sa = (a > 0) - (a < 0)
        sb = (b > 0) - (b < 0)
        if sa >= 0 and sb >= 0:
            return 1 if (sa or sb) else 0
        if sa <= 0 and sb <= 0:
            return -1
        # opposite signs: compare a^2 with b^2 d
        diff = a * a - b * b * self.d
        s = (diff > 0) - (diff < 0)
        return s if sa > 0 else -s

    def _cmp(self, other) -> int:
        o = self._coerce(other)
        if o is NotImplemented:
            raise TypeError(f"cannot compare QuadNumber with {type(other).__name__}")
        return (self - o).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        if isinstance(other, QuadNumber):
            return self.d == other.d and self.a == other.a and self.b == other.b
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def __repr__(self):
        return f"QuadNumber({format_scalar(self)!r})"

    def __str__(self):
        return format_scalar(self)


# ----------------------------------------------------------------------
# field descriptors


@dataclass(frozen=True)
class Rationals:
    name: str = "Q"

    def coerce(self, x) -> Fraction:
        if isinstance(x, QuadNumber):
            if not x.is_rational:
                raise FieldMismatchError(f"{x} is not rational")
            return x.a
        if isinstance(x, str):
            return self.coerce(parse_scalar(x))
        return _frac(x)

    def contains(self, x) -> bool:
        return isinstance(x, (int, Fraction)) or (
            isinstance(x, QuadNumber) and x.is_rational
        )

    @property
    def zero(self) -> Fraction:
        return Fraction(0)

    @property
    def one(self) -> Fraction:
        return Fraction(1)

    def to_json(self):
        return "Q"


@dataclass(frozen=True)
class QuadExt:
    d: int

    def __post_init__(self):
        if not _squarefree(self.d):
            raise ValueError(f"QuadExt needs a square-free d > 1, got {self.d}")

    @property
    def name(self) -> str:
        return f"Q(sqrt{self.d})"

    def coerce(self, x):
        if isinstance(x, str):
            x = parse_scalar(x)
        if isinstance(x, QuadNumber):
            if x.d != self.d:
                raise FieldMismatchError(f"{x} is not in Q(sqrt {self.d})")
            return x
        return QuadNumber(_frac(x), 0, self.d)

    def contains(self, x) -> bool:
        return isinstance(x, (int, Fraction)) or (
            isinstance(x, QuadNumber) and x.d == self.d
        )

    @property
    def zero(self):
        return QuadNumber(0, 0, self.d)

    @property
    def one(self):
        return QuadNumber(1, 0, self.d)

    def to_json(self):
        return {"quad": self.d}


QQ = Rationals()
Field = Union[Rationals, QuadExt]


def field_of(x) -> Field:
    if isinstance(x, QuadNumber) and not x.is_rational:
        return QuadExt(x.d)
    return QQ


def join_fields(*fields: Field) -> Field:
    """Smallest field among ``fields`` containing all of them."""
    out: Field = QQ
    for f in fields:
        if isinstance(f, QuadExt):
            if isinstance(out, QuadExt) and out.d != f.d:
                raise FieldMismatchError(f"{out.name} vs {f.name}")
            out = f
    return out


def common_field(values) -> Field:
    return join_fields(*(field_of(v) for v in values))


def field_from_json(obj) -> Field:
    if obj in ("Q", "QQ", None):
        return QQ
    if isinstance(obj, dict) and "quad" in obj:
        return QuadExt(int(obj["quad"]))
    raise ValueError(f"unknown exact field descriptor: {obj!r}")


# ----------------------------------------------------------------------
# generic scalar helpers


def sign(x) -> int:
    if isinstance(x, QuadNumber):
        return x.sign()
    return (x > 0) - (x < 0)


def simplify(x):
    """Collapse a rational QuadNumber to a Fraction."""
    if isinstance(x, QuadNumber) and x.is_rational:
        return x.a
    if isinstance(x, int):
        return Fraction(x)
    return x


def sqrt_bounds(d: int, bits: int = 64) -> tuple[Fraction, Fraction]:
    """Rational ``lo < sqrt(d) < hi`` with ``hi - lo = 2**-bits``."""
    scale = 1 << bits
    r = math.isqrt(d * scale * scale)
    return Fraction(r, scale), Fraction(r + 1, scale)


def floor_scalar(x) -> int:
    if isinstance(x, QuadNumber):
        k = math.floor(x.a + x.b * sqrt_bounds(x.d)[0])
        while QuadNumber(k, 0, x.d) > x:
            k -= 1
        while QuadNumber(k + 1, 0, x.d) <= x:
            k += 1
        return k
    return math.floor(x)


def ceil_scalar(x) -> int:
    return -floor_scalar(-x)


def to_mpf(x, dps: int = 50):
    import mpmath

    with mpmath.workdps(dps):
        if isinstance(x, QuadNumber):
            return mpmath.mpf(x.a.numerator) / x.a.denominator + mpmath.mpf(
                x.b.numerator
            ) / x.b.denominator * mpmath.sqrt(x.d)
        x = _frac(x)
        return mpmath.mpf(x.numerator) / x.denominator


# ----------------------------------------------------------------------
# text format: "3/4", "3/4+5/2√2", "-√3", ...

_SQRT = "√"
_QUAD_RE = re.compile(
    r"^\s*(?P<a>[+-]?\d+(?:/\d+)?)?\s*(?:(?P<bsign>[+-])?\s*(?P<b>\d+(?:/\d+)?)?\s*(?:√|\*?sqrt\()(?P<d>\d+)\)?)?\s*$"
)


def format_scalar(x) -> str:
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, QuadNumber):
        if x.b == 0:
            return str(x.a)
        if x.b == 1:
            bpart = f"{_SQRT}{x.d}"
        elif x.b == -1:
            bpart = f"-{_SQRT}{x.d}"
        else:
            bpart = f"{x.b}{_SQRT}{x.d}"
        if x.a == 0:
            return bpart
        if not bpart.startswith("-"):
            bpart = "+" + bpart
        return f"{x.a}{bpart}"
    raise TypeError(f"not an exact scalar: {x!r}")


def parse_scalar(s, field: Field | None = None):
    """Parse the exact text format; optionally coerce into ``field``."""
    if isinstance(s, (int, Fraction, QuadNumber)) and not isinstance(s, bool):
        val = s if not isinstance(s, int) else Fraction(s)
        return field.coerce(val) if field is not None else val
    if not isinstance(s, str):
        raise ValueError(f"scalar must be a string, got {type(s).__name__}")
    m = _QUAD_RE.match(s)
    if not m or (m.group("a") is None and m.group("d") is None):
        raise ValueError(f"malformed scalar: {s!r}")
    a = Fraction(m.group("a")) if m.group("a") else Fraction(0)
    if m.group("d") is None:
        out = a
    else:
        if m.group("a") is not None and m.group("bsign") is None:
            # "3√2" was captured with the digits in the a-slot
            b, a = a, Fraction(0)
        else:
            b = Fraction(m.group("b")) if m.group("b") else Fraction(1)
            if m.group("bsign") == "-":
                b = -b
        out = QuadNumber(a, b, int(m.group("d")))
    if field is not None:
        return field.coerce(out)
    return out
