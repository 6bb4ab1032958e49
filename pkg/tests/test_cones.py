from __future__ import annotations

import random
from fractions import Fraction as Fr

import pytest

from stablab.cones import (
    ChernData,
    HodgeFailure,
    IntersectionTensor,
    bogomolov_unstable,
    cplus_path_certificate,
    cplus_witness,
    crossterm_nondegenerate,
    curve_of,
    curve_power,
    discriminant_pair,
    discriminant_std,
    eval_classes,
    extension_discriminant_identity,
    hodge_signature_ok,
    kplus_contains,
    lefschetz_solve,
    library,
    q_form_matrix,
    signature,
    verify_path_point,
    xi,
)

P1P1, P1P1P1, P2 = library("P1xP1"), library("P1xP1xP1"), library("P2")


def test_eval_examples():
    assert eval_classes(P1P1, [(1, 0), (0, 1)]) == 1
    assert eval_classes(P1P1, [(0, 0), (0, 1)]) == 0
    assert eval_classes(P1P1P1, [(1, 0, 0), (1, 0, 0), (0, 1, 0)]) == 0


def test_eval_arity_checked():
    with pytest.raises(ValueError):
        eval_classes(P1P1, [(1, 0)])


def test_tensor_json_round_trip():
    T = library("Bl1P2")
    assert IntersectionTensor.from_json(T.to_json()).entries == T.entries


def test_q_form_examples():
    assert q_form_matrix(P1P1, (2, 3)) == [[0, 1], [1, 0]]
    assert signature(q_form_matrix(P1P1, (2, 3))) == (1, 1, 0)
    assert q_form_matrix(P1P1P1, (1, 1, 1)) == [[0, 1, 1], [1, 0, 1], [1, 1, 0]]
    assert signature(q_form_matrix(P1P1P1, (1, 1, 1))) == (1, 2, 0)
    assert signature(q_form_matrix(P2, (1,))) == (1, 0, 0)


@pytest.mark.parametrize("name", ["P2", "P1xP1", "Bl1P2", "P3", "P1xP1xP1", "P1xP2"])
def test_hodge_signature_on_declared_amples(name):
    T = library(name)
    assert len(T.ample_samples) >= 5
    assert all(hodge_signature_ok(T, L) for L in T.ample_samples)


def test_kplus_examples():
    assert kplus_contains(P1P1, (1, 1), (1, 1))
    assert not kplus_contains(P1P1, (1, 1), (1, -1))
    assert kplus_contains(P1P1P1, (1, 2, 3), (1, 2, 3))


def test_kplus_self_duality():
    rng = random.Random(3)
    for T in (P1P1, P1P1P1, library("Bl1P2")):
        for L in T.ample_samples:
            inside = []
            while len(inside) < 12:
                b = [Fr(rng.randint(-4, 6)) for _ in range(T.rho)]
                if kplus_contains(T, L, b):
                    inside.append(b)
            for a in inside:
                for b in inside:
                    assert eval_classes(T, [a, b] + [L] * (T.n - 2)) > 0


def test_lefschetz_examples():
    L = (1, 1)
    assert lefschetz_solve(P1P1, L, curve_power(P1P1, L)) == [1, 1]
    assert lefschetz_solve(P1P1, L, (1, 0)) == [0, 1]
    zero = IntersectionTensor(2, 2, {}, "zero")
    with pytest.raises(HodgeFailure):
        lefschetz_solve(zero, L, (1, 0))


def test_lefschetz_round_trip():
    rng = random.Random(1)
    for T in (P1P1P1, library("P1xP2")):
        for L in T.ample_samples:
            g = [Fr(rng.randint(-5, 5)) for _ in range(T.rho)]
            assert curve_of(T, L, lefschetz_solve(T, L, g)) == g


def test_cplus_witness_examples():
    L = (1, 1, 1)
    assert cplus_witness(P1P1P1, curve_power(P1P1P1, L), L) == [1, 1, 1]
    assert cplus_witness(P1P1, (1, 1), (1, 1)) == [1, 1]
    # (1, -1) has negative square for every ample class on P1xP1
    g = (-1, 1)
    for L in P1P1.ample_samples:
        assert cplus_witness(P1P1, g, L) is None


def test_discriminant_examples():
    L = (1,)
    line = ChernData(1, (3,), {(): 0})
    assert discriminant_pair(line, P2, L) == 0
    F = ChernData(2, (0,), {(): -1})
    assert discriminant_pair(F, P2, L) == Fr(-1, 2)
    assert xi(F, F) == [0]


def test_bogomolov_examples():
    assert bogomolov_unstable(ChernData(2, (0,), {(): -1}), P2, (1,))
    assert not bogomolov_unstable(ChernData(2, (0,), {(): 1}), P2, (1,))
    assert bogomolov_unstable(ChernData(1, (0,), {(): -1}), P2, (1,))
    assert not bogomolov_unstable(ChernData(2, (0,), {(): -1}), P2, (1,), beta_const=1)


def test_extension_identity_examples():
    A, B = ChernData(1, (1, 0), {(): 0}), ChernData(1, (-1, 0), {(): 0})
    T = library("P2")
    A2, B2 = ChernData(1, (1,), {(): 0}), ChernData(1, (-1,), {(): 0})
    chk = extension_discriminant_identity(A2, B2, T, (1,))
    assert chk.equal and chk.lhs == -2
    chk = extension_discriminant_identity(A, A, P1P1, (1, 1))
    assert chk.equal and chk.rhs == 0
    C, D = ChernData(2, (2, 4), {(): 3}), ChernData(3, (3, 6), {(): -1})
    chk = extension_discriminant_identity(C, D, P1P1, (1, 2))
    assert chk.equal and chk.rhs == 0
    _ = B


def test_one_over_rank_normalization_is_off_by_two():
    """Rank-1 + rank-1 on P2 with Delta = (c2 - (r-1)/(2r) c1^2)/r and xi taken against E."""
    from stablab.cones import extension_chern

    A, B = ChernData(1, (1,), {(): 0}), ChernData(1, (-1,), {(): 0})
    E = extension_chern(A, B, P2)
    lhs = discriminant_pair(E, P2, (1,)) / 2 - discriminant_pair(A, P2, (1,)) - discriminant_pair(B, P2, (1,))
    x = xi(A, E)
    rhs = -Fr(1, 2) * eval_classes(P2, [x, x])
    assert (lhs, rhs) == (Fr(-1, 4), Fr(-1, 2))
    # the normalized discriminant balances
    assert extension_discriminant_identity(A, B, P2, (1,)).equal


def test_crossterm_examples():
    g0, gi = (1, 2), (3, 1)
    assert not crossterm_nondegenerate(g0, g0, (1, 1), (1, 2))
    assert crossterm_nondegenerate(g0, gi, (1, 1), (1, 2))
    assert not crossterm_nondegenerate(g0, gi, (1, 1), (1, 1))


def test_path_certificate_single_cone():
    L = (1, 2)
    g = curve_power(P1P1, L)
    cert = cplus_path_certificate(P1P1, g, g, L, L, t_samples=11)
    assert cert.ok and all(verify_path_point(P1P1, g, g, L, L, p) for p in cert.points)


def test_path_certificate_surface_and_threefold():
    for T, L1, L2 in [(P1P1, (1, 3), (2, 1)), (P1P1P1, (1, 1, 1), (3, 1, 2))]:
        g0, gi = curve_power(T, L2), curve_power(T, L1)
        cert = cplus_path_certificate(T, g0, gi, L1, L2, t_samples=101)
        assert cert.ok and len(cert.points) == 101
        assert all(verify_path_point(T, g0, gi, L1, L2, p) for p in cert.points)


def test_path_certificate_precondition():
    with pytest.raises(ValueError):
        cplus_path_certificate(P1P1, (-1, 1), (1, 1), (1, 1), (1, 1))
