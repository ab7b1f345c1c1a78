import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cocylab.bunching import orbit_quantity
from cocylab.cocycle import CocycleSystem, Generator, conjugate_system, product_along_cyclic_word
from cocylab.errors import BadWeights
from cocylab.sft import Metric, PeriodicOrbit, TransitionStructure, enumerate_periodic_orbits
from cocylab.spectrum import MarkovSampler, approximation_gap, measure_exponents, periodic_exponents

FULL2 = TransitionStructure.full_shift(2)
GOLDEN = TransitionStructure.from_matrix([[1, 1], [1, 0]])
HALF = Metric(0.5, 1.0)


def conformal(seed):
    rng = np.random.default_rng(seed)

    def f(w):
        t, s = rng.uniform(0, 6.3), rng.uniform(0.7, 1.4)
        return s * np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])

    return CocycleSystem(Generator.from_function(FULL2, 1, f), HALF)


def test_periodic_constant():
    cs = CocycleSystem(Generator.constant(FULL2, np.diag([3.0, 1 / 3])), HALF)
    lp, lm = periodic_exponents(cs, PeriodicOrbit((0,)))
    assert lp == pytest.approx(math.log(3), abs=1e-14) and lm == pytest.approx(-math.log(3), abs=1e-14)


def test_periodic_conformal():
    cs = conformal(1)
    for p in enumerate_periodic_orbits(FULL2, 8):
        lp, lm = periodic_exponents(cs, p)
        assert abs(lp - lm) < 1e-10


def test_similarity_invariance(near_identity):
    c = Generator.random_near(FULL2, 1, np.eye(2), 0.2, np.random.default_rng(2))
    b = conjugate_system(near_identity, c)
    for p in enumerate_periodic_orbits(FULL2, 6):
        assert np.allclose(periodic_exponents(b, p), periodic_exponents(near_identity, p), atol=1e-12)


def test_fair_coin_default():
    s = MarkovSampler(FULL2, seed=1)
    assert np.allclose(s.P, 0.5)
    paths = s.paths(20, 5000)
    freq = paths.mean()
    sigma = math.sqrt(0.25 / paths.size)
    assert abs(freq - 0.5) < 3 * sigma


def test_golden_parry_measure():
    s = MarkovSampler(GOLDEN)
    q = GOLDEN.matrix.astype(float)
    vals, right = np.linalg.eig(q)
    i = int(np.argmax(vals.real))
    vals_l, left = np.linalg.eig(q.T)
    j = int(np.argmax(vals_l.real))
    u, r = np.abs(left[:, j].real), np.abs(right[:, i].real)
    want = u * r / np.dot(u, r)
    assert np.allclose(s.pi, want, atol=1e-12)
    phi = (1 + math.sqrt(5)) / 2
    assert s.pi[1] == pytest.approx(1 / (1 + phi ** 2), abs=1e-12)


def test_disallowed_never_sampled():
    paths = MarkovSampler(GOLDEN, seed=3).paths(100, 10_000)
    assert not np.any((paths[:, :-1] == 1) & (paths[:, 1:] == 1))


def test_bad_weights():
    with pytest.raises(BadWeights):
        MarkovSampler(GOLDEN, weights=[[1, 1], [1, 1]])


def test_measure_constant():
    cs = CocycleSystem(Generator.constant(FULL2, np.diag([2.0, 1.0])), HALF)
    est = measure_exponents(cs, MarkovSampler(FULL2, seed=0), 500, 8)
    assert est.lam_plus == pytest.approx(math.log(2), abs=1e-12)
    assert est.lam_minus == pytest.approx(0, abs=1e-12)


def test_measure_conformal():
    est = measure_exponents(conformal(4), MarkovSampler(FULL2, seed=0), 2000, 8)
    assert abs(est.lam_plus - est.lam_minus) < 1e-10


def test_measure_stable_under_doubling():
    rng = np.random.default_rng(5)

    def sl2(w):
        m = np.eye(2) + 0.5 * rng.standard_normal((2, 2))
        return m / math.sqrt(abs(np.linalg.det(m)))

    cs = CocycleSystem(Generator.from_function(FULL2, 0, sl2), HALF)
    e1 = measure_exponents(cs, MarkovSampler(FULL2, seed=1), 2000, 32)
    e2 = measure_exponents(cs, MarkovSampler(FULL2, seed=2), 4000, 32)
    assert abs(e1.lam_plus - e2.lam_plus) < 2 * math.hypot(e1.se_plus, e2.se_plus) + 0.02


def test_gap_constant_and_monotone(near_identity):
    cs = CocycleSystem(Generator.constant(FULL2, np.diag([2.0, 0.7])), HALF)
    g = approximation_gap(cs, 3, MarkovSampler(FULL2, seed=0), 500, 4)
    assert g.gaps[0] == pytest.approx(0, abs=1e-12)
    g = approximation_gap(near_identity, 10, MarkovSampler(FULL2, seed=0), 1000, 8)
    assert all(b <= a for a, b in zip(g.gaps, g.gaps[1:]))
    assert g.gaps[9] <= g.gaps[3]


@settings(max_examples=15)
@given(st.integers(0, 2 ** 31))
def test_bunching_quantity_identity(seed):
    rng = np.random.default_rng(seed)
    cs = CocycleSystem(Generator.random_near(FULL2, 1, np.eye(2), 0.5, rng), HALF)
    for p in enumerate_periodic_orbits(FULL2, 5):
        lp, lm = periodic_exponents(cs, p)
        q = orbit_quantity(product_along_cyclic_word(cs, p), p.period, cs.metric)
        assert abs(q - (lp - lm + math.log(0.5))) < 1e-10
