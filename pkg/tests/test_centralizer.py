import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cocylab.centralizer import centralizer_membership, commutant_tower, commutant_tower_matrix, coset_test
from cocylab.cocycle import CocycleSystem, Generator, conjugate_system, perturb
from cocylab.conjugacy import ConstantField, build_conjugacy
from cocylab.errors import CacheMismatch
from cocylab.sft import Metric, PeriodicOrbit, TransitionStructure, random_point

FULL2 = TransitionStructure.full_shift(2)
HALF = Metric(0.5, 1.0)
P0 = PeriodicOrbit((0,))


def brute_dim(m):
    d = m.shape[0]
    op = np.kron(m, np.eye(d)) - np.kron(np.eye(d), m.T)
    s = np.linalg.svd(op, compute_uv=False)
    return int(np.sum(s < 1e-9 * max(1.0, s[0])))


def test_tower_sign_flip():
    rep = commutant_tower_matrix(np.diag([2.0, -2.0]), 12)
    assert [r for _, r in rep.dims] == [2 if k % 2 else 4 for k in range(1, 13)]
    assert rep.L_star == 2 and rep.stable
    assert all(a < 1e-8 for _, a in rep.stabilization)


def test_tower_distinct_moduli():
    rep = commutant_tower_matrix(np.diag([3.0, 1.5, 0.5]), 8)
    assert all(r == 3 for _, r in rep.dims) and rep.L_star == 1


def test_tower_identity():
    rep = commutant_tower_matrix(np.eye(3), 4)
    assert all(r == 9 for _, r in rep.dims)


def test_tower_along_orbit():
    cs = CocycleSystem(Generator.constant(FULL2, np.diag([2.0, -2.0])), HALF)
    rep = commutant_tower(cs, PeriodicOrbit.from_word((0, 1)), 6)
    # the return map over a period-2 orbit is already 4I
    assert all(r == 4 for _, r in rep.dims)


@given(st.integers(0, 2 ** 31), st.integers(1, 6))
def test_tower_matches_brute_force(seed, k):
    rng = np.random.default_rng(seed)
    th = 2 * math.pi / int(rng.integers(2, 6))
    m = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]]) * float(rng.uniform(0.5, 2))
    rep = commutant_tower_matrix(m, 6)
    p = np.linalg.matrix_power(m, k)
    assert rep.dim(k) == brute_dim(p / np.linalg.norm(p, 2))
    assert rep.containment < 1e-8


@pytest.fixture(scope="module")
def roundtrip():
    rng = np.random.default_rng(7)
    a = CocycleSystem(Generator.random_near(FULL2, 1, np.eye(2), 0.15, rng), HALF, "A")
    c = Generator.from_function(FULL2, 1, lambda w: (1.0 if w == (0, 0, 0) else 1 + 0.3 * rng.uniform(-1, 1)) * np.eye(2))
    cinv = Generator(FULL2, 1, {w: np.linalg.inv(c.value(w)) for w in c.words})
    b = conjugate_system(a, cinv, "B")
    samples = [random_point(FULL2, rng, 6) for _ in range(6)]
    return a, b, samples


def test_membership_scalars(roundtrip):
    a, b, samples = roundtrip
    assert centralizer_membership(a, ConstantField(np.eye(2)), samples, depth=6).max_residual == 0
    assert centralizer_membership(a, ConstantField(2 * np.eye(2)), samples, depth=6).passed


def test_membership_negative(roundtrip):
    a, b, samples = roundtrip
    shifted = (0.5 * np.eye(2) + a.at(P0.point()))
    d = build_conjugacy(a, a, P0, shifted, 5, check=False)
    rep = centralizer_membership(a, d, samples, depth=6)
    assert not rep.passed and rep.max_residual > 1e-6


def test_coset_cases(roundtrip):
    a, b, samples = roundtrip
    c1 = build_conjugacy(a, b, P0, np.eye(2), 5)
    same = coset_test(a, b, c1, c1, samples, depth=6)
    assert same.agree and same.quotient.passed and same.direct.passed
    c2 = build_conjugacy(a, b, P0, 2 * np.eye(2), 5)
    scaled = coset_test(a, b, c1, c2, samples, depth=6)
    assert scaled.agree and scaled.quotient.passed and scaled.direct.passed
    c3 = build_conjugacy(a, b, P0, 0.5 * np.eye(2) + a.at(P0.point()), 5, check=False)
    shifted = coset_test(a, b, c1, c3, samples, depth=6)
    assert shifted.agree and not shifted.direct.passed


def test_coset_commuting_shift_on_conformal_fixed_point():
    # when A at the fixed point is central for every cycle functional, a
    # commutant-shifted C_p is a second valid solution and both routes pass
    rng = np.random.default_rng(3)
    base = CocycleSystem(Generator.random_near(FULL2, 1, np.eye(2), 0.1, rng), HALF, "A")
    table = base.gen.table
    table[(0, 0, 0)] = 1.2 * np.eye(2)
    a = base.with_generator(Generator(FULL2, 1, table))
    c1 = build_conjugacy(a, a, P0, np.eye(2), 5)
    c2 = build_conjugacy(a, a, P0, 0.5 * np.eye(2) + a.at(P0.point()), 5)
    samples = [random_point(FULL2, rng, 6) for _ in range(5)]
    rep = coset_test(a, a, c1, c2, samples, depth=6)
    assert rep.agree and rep.quotient.passed and rep.direct.passed


def test_coset_cache_mismatch(roundtrip):
    a, b, samples = roundtrip
    with pytest.raises(CacheMismatch):
        coset_test(a, b, build_conjugacy(a, b, P0, np.eye(2), 4), build_conjugacy(a, b, P0, np.eye(2), 5), samples)
