from __future__ import annotations

import itertools
import random
from fractions import Fraction as Fr

import numpy as np
import pytest

from stablab import _kernels, linalg
from stablab.exact import QuadNumber
from stablab.fields import GF, field_ops
from stablab.lp import fourier_motzkin, max_margin, satisfies


def rand_matrix(rng, r, c, span=4):
    return [[Fr(rng.randint(-span, span), rng.randint(1, 3)) for _ in range(c)] for _ in range(r)]


def test_rref_rank_nullspace_consistent():
    rng = random.Random(3)
    for _ in range(50):
        r, c = rng.randint(1, 5), rng.randint(1, 5)
        M = rand_matrix(rng, r, c)
        N = linalg.nullspace(M, c)
        assert linalg.rank(M) + len(N) == c
        for v in N:
            assert all(x == 0 for x in linalg.matvec(M, v))


def test_inverse_and_det():
    A = [[Fr(2), Fr(1)], [Fr(1), Fr(1)]]
    assert linalg.det(A) == 1
    assert linalg.matmul(A, linalg.inverse(A)) == linalg.identity(2)


def test_signature_of_hyperbolic_plane_and_quad_entries():
    assert linalg.signature([[0, 1], [1, 0]]) == (1, 1, 0)
    s2 = QuadNumber(Fr(0), Fr(1), 2)
    assert linalg.signature([[s2, 0], [0, 1 - s2]]) == (1, 1, 0)


def test_signature_matches_sylvester_random():
    rng = random.Random(5)
    for _ in range(50):
        n = rng.randint(1, 4)
        P = rand_matrix(rng, n, n)
        if linalg.det(P) == 0:
            continue
        D = [[Fr(0)] * n for _ in range(n)]
        signs = [rng.choice([-1, 0, 1]) for _ in range(n)]
        for i, s in enumerate(signs):
            D[i][i] = Fr(s * rng.randint(1, 5))
        A = linalg.matmul(linalg.matmul(linalg.transpose(P), D), P)
        expected = (signs.count(1), signs.count(-1), signs.count(0))
        assert linalg.signature(A) == expected


# ---------------------------------------------------------------- exact LP


def test_max_margin_strict_rows():
    rows = [([1, -1], ">", 0), ([1, 1], "=", 1)]
    x, t = max_margin(rows, 2, nonneg=True)
    assert satisfies(x, rows)
    assert x[0] > x[1]


def test_infeasible_system_detected_by_both_methods():
    rows = [([1, -1], ">", 0), ([1, -1], "<", 0), ([1, 1], "=", 1)]
    assert max_margin(rows, 2, nonneg=True) is None
    assert fourier_motzkin(rows + [([1, 0], ">=", 0), ([0, 1], ">=", 0)], 2) is None


def test_simplex_and_fourier_motzkin_agree_on_random_systems():
    rng = random.Random(11)
    for _ in range(150):
        n = rng.randint(1, 3)
        rows = [([rng.randint(-3, 3) for _ in range(n)], rng.choice([">", ">=", "<", "="]), rng.randint(-2, 2))
                for _ in range(rng.randint(1, 4))]
        a = max_margin(rows, n)
        b = fourier_motzkin(rows, n)
        assert (a is None) == (b is None)
        if a is not None:
            assert satisfies(a[0], rows)
            assert satisfies(b, rows)


# ---------------------------------------------------------------- finite fields


@pytest.mark.parametrize("q", [2, 3, 4, 5, 9])
def test_gf_field_axioms(q):
    F = GF(q)
    els = list(F.elements())
    for a, b in itertools.product(els, els):
        assert F.add[a, b] == F.add[b, a]
        assert F.mul[a, b] == F.mul[b, a]
    for a in els[1:]:
        assert F.mul[a, F.inv[a]] == 1
        assert F.add[a, F.neg[a]] == 0


def test_field_descriptors():
    assert isinstance(field_ops("F2"), GF)
    assert field_ops({"quad": 2}).to_json() == {"quad": 2}
    with pytest.raises(ValueError):
        field_ops("F6")


@pytest.mark.parametrize("q", [2, 3, 4])
def test_numba_and_numpy_kernels_agree(q):
    F = GF(q)
    rng = np.random.default_rng(q)
    stack = rng.integers(0, q, size=(300, 3, 5))
    assert np.array_equal(_kernels.batch_rank(stack, F.tables, use_numba=True),
                          _kernels.batch_rank(stack, F.tables, use_numba=False))
    M = rng.integers(0, q, size=(7, 9))
    R1, p1 = _kernels.rref(M, F.tables, use_numba=True)
    R2, p2 = _kernels.rref(M, F.tables, use_numba=False)
    assert np.array_equal(R1, R2) and np.array_equal(p1, p2)
    A, B = rng.integers(0, q, size=(4, 6)), rng.integers(0, q, size=(6, 3))
    assert np.array_equal(_kernels.matmul(A, B, F.tables, use_numba=True),
                          _kernels.matmul(A, B, F.tables, use_numba=False))


def test_gf_rank_matches_exact_rank_for_prime_field():
    F = GF(5)
    rng = np.random.default_rng(0)
    for _ in range(30):
        M = rng.integers(0, 5, size=(3, 4))
        # rank over F5 never exceeds the integer rank
        assert F.rank(M) <= linalg.rank([[Fr(int(x)) for x in row] for row in M])
        assert F.rank(M) + F.nullspace(M).shape[1] == 4


def test_env_switch_selects_numpy_backend_with_same_results():
    import json
    import os
    import subprocess
    import sys

    code = (
        "import json, numpy as np\n"
        "from stablab import _accel\n"
        "from stablab.fields import GF\n"
        "from stablab.quiver import QuiverSpec, random_representation, semistability_check\n"
        "rng = np.random.default_rng(1)\n"
        "Q = QuiverSpec(2, ((1, 1), (0, 1)))\n"
        "kinds = [semistability_check(random_representation(GF(3), Q, (2, 1, 1, 2), rng), (1, 2)).kind for _ in range(20)]\n"
        "print(json.dumps([_accel.USE_NUMBA, kinds]))\n"
    )
    out = {}
    for flag in ("0", "1"):
        env = dict(os.environ, STABLAB_DISABLE_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        out[flag] = json.loads(res.stdout)
    assert out["1"][0] is False and out["0"][0] is True
    assert out["0"][1] == out["1"][1]
