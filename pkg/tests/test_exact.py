from __future__ import annotations

import random
from fractions import Fraction as Fr

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stablab.exact import (
    FieldMismatchError,
    QuadNumber,
    ceil_scalar,
    floor_scalar,
    format_scalar,
    parse_scalar,
    sign,
    sqrt_bounds,
)
from stablab.poly import Ordering, Poly, eventual_sign_threshold, poly_compare, poly_eval

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=40)


def q(a, b, d=2):
    return QuadNumber(Fr(a), Fr(b), d)


def test_quad_sign_cases():
    assert sign(q(1, 1)) == 1
    assert sign(q(-1, -1)) == -1
    assert sign(q(-1, 1)) == 1  # sqrt2 > 1
    assert sign(q(3, -2)) == 1  # 9 > 8
    assert sign(q(-3, 2)) == -1
    assert sign(q(0, 0)) == 0


def test_quad_arithmetic_identities():
    x = q(Fr(3, 4), Fr(5, 2))
    assert x * x.inverse() == 1
    assert (x - x) == 0
    assert x * x.conjugate() == x.norm()


def test_division_by_zero_raises():
    with pytest.raises(ZeroDivisionError):
        q(0, 0).inverse()


def test_mixed_fields_rejected():
    with pytest.raises(FieldMismatchError):
        _ = q(1, 1, 2) + q(1, 1, 3)


@pytest.mark.parametrize("text", ["3/4", "-7", "0", "3/4+5/2√2", "-1/3-√2", "√5", "2√3"])
def test_scalar_round_trip(text):
    x = parse_scalar(text)
    assert parse_scalar(format_scalar(x)) == x


def test_format_matches_documented_form():
    assert format_scalar(q(Fr(3, 4), Fr(5, 2))) == "3/4+5/2√2"


@settings(max_examples=300, deadline=None)
@given(fractions, fractions)
def test_format_parse_round_trip_random(a, b):
    x = q(a, b)
    assert parse_scalar(format_scalar(x)) == x


def test_quad_comparison_matches_high_precision():
    rng = random.Random(7)
    mpmath.mp.dps = 60
    for _ in range(10_000):
        a = Fr(rng.randint(-300, 300), rng.randint(1, 30))
        b = Fr(rng.randint(-300, 300), rng.randint(1, 30))
        d = rng.choice([2, 3, 5, 7])
        approx = mpmath.mpf(a.numerator) / a.denominator + mpmath.mpf(b.numerator) / b.denominator * mpmath.sqrt(d)
        expected = 0 if approx == 0 else (1 if approx > 0 else -1)
        assert sign(QuadNumber(a, b, d)) == expected


def test_sqrt_bounds_bracket():
    lo, hi = sqrt_bounds(2, 30)
    assert lo * lo < 2 < hi * hi
    assert hi - lo <= Fr(1, 2**29)


def test_floor_ceil_of_quad():
    x = q(0, 1)  # 1.414...
    assert floor_scalar(x) == 1
    assert ceil_scalar(x) == 2
    assert floor_scalar(Fr(-3, 2)) == -2


# ---------------------------------------------------------------- polynomials


def P(*coeffs):
    return Poly(tuple(Fr(c) for c in coeffs))


def test_poly_canonical_trim():
    assert P(1, 2, 0, 0).coeffs == (1, 2)
    assert P(0, 0).coeffs == ()


@pytest.mark.parametrize(
    "p,q_,expected",
    [
        (P(0, 0, 1), P(0, 0, 1), Ordering.EQUAL),
        (P(0, 4, 1), P(0, 5, 1), Ordering.LESS),
        (P(0, 1, 0, Fr(1, 6)), P(0, 0, 100), Ordering.GREATER),
    ],
)
def test_poly_compare_examples(p, q_, expected):
    assert poly_compare(p, q_) == expected


def test_poly_compare_eventual_confirmed_by_evaluation():
    p, q_ = P(0, 1, 0, Fr(1, 6)), P(0, 0, 100)
    assert poly_eval(p, 10**4) > poly_eval(q_, 10**4)


@pytest.mark.parametrize("p,m0", [(P(-5, 1), 6), (P(0, 0, 1), 1), (P(7), 0)])
def test_eventual_sign_threshold_examples(p, m0):
    assert eventual_sign_threshold(p) == m0


def test_eventual_sign_threshold_zero_poly():
    with pytest.raises(ValueError):
        eventual_sign_threshold(P())


def test_poly_eval_examples():
    assert poly_eval(P(1, 0, 1), 2) == 5
    assert poly_eval(P(), 17) == 0
    assert poly_eval(P(0, 0, 0, Fr(1, 6)), 3) == Fr(9, 2)


def test_poly_over_quad_field():
    p = Poly((q(0, 1), Fr(1)))  # m + sqrt2
    assert sign(poly_eval(p, -1)) == 1
    with pytest.raises(FieldMismatchError):
        poly_compare(p, P(Fr(3, 2), 1))
    assert poly_compare(p, P(Fr(3, 2), 1).lift(p.field)) == Ordering.LESS


@settings(max_examples=200, deadline=None)
@given(st.lists(fractions, min_size=1, max_size=5), st.lists(fractions, min_size=1, max_size=5),
       st.lists(fractions, min_size=1, max_size=5), st.fractions(min_value=Fr(1, 10), max_value=10))
def test_poly_order_compatible_with_addition_and_scaling(a, b, c, t):
    p, q_, r = Poly(tuple(a)), Poly(tuple(b)), Poly(tuple(c))
    o = poly_compare(p, q_)
    assert poly_compare(p + r, q_ + r) == o
    assert poly_compare(p * t, q_ * t) == o
