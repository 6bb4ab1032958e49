from __future__ import annotations

import itertools
import random
from fractions import Fraction as Fr

import pytest

from stablab.chambers import (
    InfeasibleError,
    Wall,
    compute_walls,
    enumerate_chambers,
    locate,
    rational_representative,
    sample_points,
)
from stablab.exact import QuadNumber, sign
from stablab.sheaf import FamilySpec, SheafClass, verdict_vector

E = SheafClass(2, 2, ((1, 2, 2), (1, 4, 2)), "E")
F = SheafClass(2, 1, ((0, 2, 1), (0, 1, 1)), "F")


def test_single_wall_example():
    walls = compute_walls(E, FamilySpec([F]))
    assert [w.normal for w in walls] == [(1, -1)]


def test_proportional_family_has_no_walls():
    G = SheafClass(2, 1, ((Fr(1, 2), 1, 1), (Fr(1, 2), 2, 1)), "G")
    assert compute_walls(E, FamilySpec([G])) == []


def test_dimension_one_without_constant_term_has_no_walls():
    E1 = SheafClass(1, 1, ((0, 1), (0, 1)), "E")
    F1 = SheafClass(1, 1, ((3, 1), (-3, 1)), "F")
    assert compute_walls(E1, FamilySpec([F1]), include_constant=False) == []
    assert len(compute_walls(E1, FamilySpec([F1]))) == 1


def test_dimension_zero_rejected():
    E0 = SheafClass(0, 1, ((1,),), "E")
    with pytest.raises(ValueError):
        compute_walls(E0, FamilySpec([SheafClass(0, 1, ((2,),), "F")]))


def test_three_chambers_for_one_wall():
    walls = [Wall((1, -1))]
    chs = enumerate_chambers(walls)
    assert [c.signs for c in chs] == [(1,), (0,), (-1,)]
    assert [c.full_dim for c in chs] == [True, False, True]
    for c in chs:
        assert sum(c.sample) == 1 and all(x >= 0 for x in c.sample)


def test_no_walls_one_chamber():
    chs = enumerate_chambers([], j0=3)
    assert len(chs) == 1 and chs[0].signs == ()


def _grid_sign_vectors(walls, j0, N):
    seen = set()
    for comp in itertools.product(range(N + 1), repeat=j0 - 1):
        if sum(comp) > N:
            continue
        pt = [Fr(c, N) for c in comp] + [Fr(N - sum(comp), N)]
        seen.add(tuple(sign(w.value(pt)) for w in walls))
    return seen


def test_two_generic_walls_match_grid_oracle():
    walls = [Wall((1, -2, 0)), Wall((0, 1, -1))]
    chs = enumerate_chambers(walls)
    assert {c.signs for c in chs} == _grid_sign_vectors(walls, 3, 60)
    assert len(chs) == 9


def test_random_arrangements_match_grid_oracle():
    rng = random.Random(8)
    for _ in range(15):
        walls = []
        for _ in range(rng.randint(1, 3)):
            n = [rng.randint(-2, 2) for _ in range(3)]
            if any(n) and not (all(x >= 0 for x in n) or all(x <= 0 for x in n)):
                walls.append(Wall(tuple(n)))
        chs = enumerate_chambers(walls, j0=3)
        got = {c.signs for c in chs}
        # the grid can miss lower-dimensional faces off grid lines; every grid vector must be found
        assert _grid_sign_vectors(walls, 3, 24) <= got
        assert all(c.full_dim == (0 not in c.signs) for c in chs)


def test_simplex_and_fourier_motzkin_enumerate_the_same():
    walls = [Wall((1, -2, 0)), Wall((0, 1, -1)), Wall((2, 1, -3))]
    a = [c.signs for c in enumerate_chambers(walls)]
    b = [c.signs for c in enumerate_chambers(walls, method="fm")]
    assert a == b


def test_positive_region_drops_boundary_faces():
    walls = [Wall((1, 0, -1))]
    full = {c.signs for c in enumerate_chambers(walls)}
    pos = enumerate_chambers(walls, region="positive")
    assert {c.signs for c in pos} <= full
    assert all(all(x > 0 for x in c.sample) for c in pos)


def test_locate_examples():
    walls = [Wall((1, -1))]
    assert locate((1, 2), walls) == (-1,)
    assert locate((3, 3), walls) == (0,)
    assert locate((QuadNumber(Fr(1), Fr(1), 2), 2), walls) == (1,)


def test_rational_representative_relocates():
    walls = [Wall((1, -1))]
    s = (QuadNumber(Fr(1), Fr(1), 2), Fr(2))
    rep = rational_representative(locate(s, walls), walls)
    assert locate(rep.sigma, walls) == (1,)
    assert all(isinstance(x, Fr) for x in rep.sigma)


def test_all_zero_signs_on_spanning_walls():
    walls = [Wall((1, -1, 0)), Wall((0, 1, -1))]
    rep = rational_representative((0, 0), walls)
    assert rep.sigma == (Fr(1, 3), Fr(1, 3), Fr(1, 3))


def test_infeasible_sign_vector():
    walls = [Wall((1, -1)), Wall((1, -1))]
    with pytest.raises(InfeasibleError):
        rational_representative((1, -1), walls)


def test_wall_normals_are_integer_and_canonical():
    rng = random.Random(1)
    for _ in range(50):
        E_ = SheafClass(2, 3, tuple((Fr(rng.randint(-5, 5), 7), Fr(rng.randint(-5, 5), 3), 3 * c) for c in (1, 2, 1)), "E")
        fam = FamilySpec([SheafClass(2, 1, tuple((rng.randint(-3, 3), rng.randint(-3, 3), c) for c in (1, 2, 1)), "F")])
        for w in compute_walls(E_, fam):
            assert all(isinstance(x, int) for x in w.normal)
            assert any(x != 0 for x in w.normal)


def test_chamber_samples_give_identical_verdicts():
    fam = FamilySpec([F])
    walls = compute_walls(E, fam)
    rng = random.Random(0)
    for ch in enumerate_chambers(walls):
        vs = {verdict_vector(E, fam, p) for p in sample_points(ch, walls, 10, rng)}
        assert len(vs) == 1
