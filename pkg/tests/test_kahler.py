from __future__ import annotations

import itertools
import random
from fractions import Fraction as Fr

import pytest

from stablab.chambers import InfeasibleError
from stablab.cones import library
from stablab.exact import QuadNumber, sign
from stablab.kahler import (
    ChTdData,
    decompose_omega,
    default_lambda,
    hilbert_poly_omega,
    nearby_candidates,
    order_transfer,
    split_pair,
    verify_decomposition,
)
from stablab.poly import Ordering

S2 = QuadNumber(Fr(0), Fr(1), 2)
P1P1, P1P1P1 = library("P1xP1"), library("P1xP1xP1")


def test_split_examples():
    s = split_pair(1, 1)
    assert (s.lam, s.sigma, s.sigma_prime) == (1, Fr(1, 2), Fr(1, 2))
    s = split_pair(1, 2)
    assert (s.lam, s.sigma, s.sigma_prime) == (4, Fr(2, 3), Fr(1, 12))
    s = split_pair(2, 1)
    assert (s.lam, s.sigma, s.sigma_prime) == (Fr(1, 4), Fr(2, 3), Fr(16, 3))


def test_split_explicit_lambda_and_rejections():
    s = split_pair(1, 2, lam=3)
    assert s.verify(1, 2) and s.lam == 3
    with pytest.raises(ValueError):
        split_pair(1, 2, lam=Fr(3, 2))  # below theta/tau, so sigma < 0
    with pytest.raises(ValueError):
        split_pair(0, 1)
    with pytest.raises(ValueError):
        split_pair(1, -1)


def test_default_lambda_brackets_ratio():
    for tau, theta in [(1, 3), (3, 1), (1 + S2, 2), (2, 1 + S2), (Fr(1, 7), Fr(5, 3))]:
        lam = default_lambda(tau, theta)
        r = theta / tau if not isinstance(tau, QuadNumber) else theta * tau.inverse()
        if sign(r - 1) > 0:
            assert sign(lam - r) > 0
        else:
            assert 0 < lam and sign(r - lam) > 0


def test_split_over_quadratic_field():
    s = split_pair(1 + S2, 3)
    assert s.verify(1 + S2, 3) and s.lam == 3


def test_decompose_example_from_candidates():
    omega = (Fr(1), S2)
    dec = decompose_omega(P1P1, omega, [(1, 1), (1, 2), (2, 1), (1, 3)])
    chk = verify_decomposition(P1P1, dec)
    assert chk.ok and chk.rank_ok
    assert dec.j0 == 4 * (P1P1.rho + 1)
    assert all(all(isinstance(x, Fr) for x in L) for L in dec.classes)


def test_decompose_rational_candidate_omega():
    dec = decompose_omega(P1P1, (1, 2), [(1, 2), (1, 1), (2, 1), (1, 3)])
    assert verify_decomposition(P1P1, dec).ok


def test_decompose_threefold_and_reduced_mode():
    omega = (Fr(1), S2, 1 + S2)
    dec = decompose_omega(P1P1P1, omega, nearby_candidates(P1P1P1, omega))
    assert verify_decomposition(P1P1P1, dec).ok and dec.rank_ok
    red = decompose_omega(P1P1P1, omega, nearby_candidates(P1P1P1, omega), reduced=True)
    assert verify_decomposition(P1P1P1, red).ok
    assert red.j0 == 1 + 4 * (P1P1P1.rho - 1)


def test_decompose_proportional_candidates_fail():
    with pytest.raises((InfeasibleError, ValueError)):
        decompose_omega(P1P1, (1, S2), [(1, 1), (2, 2), (3, 3)])


def test_decompose_omega_outside_cone():
    with pytest.raises((InfeasibleError, ValueError)):
        decompose_omega(P1P1, (1, 5 * S2), [(1, 1), (1, 2), (2, 1)])


def test_hilbert_poly_omega_structure_sheaf_of_p2():
    O = ChTdData(2, 1, {1: {(0,): Fr(3, 2)}, 2: {(): 1}})
    assert hilbert_poly_omega(library("P2"), O, (1,)).coeffs == (1, Fr(3, 2), Fr(1, 2))


def test_hilbert_poly_omega_scaling_rules():
    T = library("P2")
    O = ChTdData(2, 1, {1: {(0,): Fr(3, 2)}, 2: {(): 1}})
    P = hilbert_poly_omega(T, O, (1,))
    P3 = hilbert_poly_omega(T, O, (3,))
    assert P3 == P.compose_scale(3)
    O2 = ChTdData(2, 2, {1: {(0,): 3}, 2: {(): 2}})
    assert hilbert_poly_omega(T, O2, (1,)) == P * 2


def test_hilbert_poly_omega_missing_data():
    with pytest.raises(KeyError):
        hilbert_poly_omega(library("P2"), ChTdData(2, 1, {2: {(): 1}}), (1,))


def _random_chtd(rng, n, rho, r):
    parts = {c: {k: Fr(rng.randint(-6, 6), rng.randint(1, 3))
                 for k in itertools.combinations_with_replacement(range(rho), n - c)} for c in range(1, n + 1)}
    return ChTdData(n, r, parts)


def test_order_transfer_threefold():
    omega = (Fr(1), S2, 1 + S2)
    dec = decompose_omega(P1P1P1, omega, nearby_candidates(P1P1P1, omega))
    rng = random.Random(1)
    for _ in range(40):
        E = _random_chtd(rng, 3, 3, rng.randint(2, 4))
        F = _random_chtd(rng, 3, 3, rng.randint(1, 2))
        a, b = order_transfer(P1P1P1, dec, E, F)
        assert a == b
    E = _random_chtd(rng, 3, 3, 2)
    half = ChTdData(3, 1, {c: {k: v / 2 for k, v in mp.items()} for c, mp in E.parts.items()})
    assert order_transfer(P1P1P1, dec, E, half) == (Ordering.EQUAL, Ordering.EQUAL)


def test_chtd_json_round_trip():
    rng = random.Random(0)
    d = _random_chtd(rng, 3, 2, 2)
    assert ChTdData.from_json(d.to_json()) == d
