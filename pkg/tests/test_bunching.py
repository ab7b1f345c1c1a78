import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cocylab.bunching import (Verdict, certify, certify_direct, certify_periodic, distortion, orbit_quantity,
                              power_certificate, require_bunched, subadditive_value)
from cocylab.cocycle import CocycleSystem, Generator, word_product
from cocylab.errors import UnbunchedInput
from cocylab.sft import (Metric, SftPoint, TransitionStructure, admissible_words, enumerate_periodic_orbits,
                         random_point)

FULL2 = TransitionStructure.full_shift(2)
HALF = Metric(0.5, 1.0)


def const(m):
    return CocycleSystem(Generator.constant(FULL2, np.asarray(m, dtype=float)), HALF)


def conformal(seed):
    rng = np.random.default_rng(seed)

    def f(w):
        t, s = rng.uniform(0, 6.3), rng.uniform(0.7, 1.4)
        return s * np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])

    return CocycleSystem(Generator.from_function(FULL2, 1, f), HALF)


def brute_max_a(cs, n):
    """Exhaustive maximum of a_n over every admissible context."""
    best = -math.inf
    for w in admissible_words(cs.ts, n + 2 * cs.radius):
        s = np.linalg.svd(word_product(cs, w), compute_uv=False)
        best = max(best, math.log(s[0] / s[-1]) + n * math.log(0.5))
    return best


def test_distortion_hand_values():
    x = SftPoint.periodic((0,))
    assert distortion(const(np.diag([2.0, 1.0])), x, 5) == pytest.approx(32)
    assert distortion(conformal(1), random_point(FULL2, np.random.default_rng(0), 4), 7) == pytest.approx(1, abs=1e-12)
    assert distortion(const(np.diag([2.0, 1.0])), x, 0) == 1


def test_subadditive_hand_values():
    assert subadditive_value(const(np.diag([2.0, 0.5])), (0, 0, 0), 3) == pytest.approx(3 * math.log(2))
    cs = conformal(2)
    assert subadditive_value(cs, (0, 1, 1, 0, 1), 3) == pytest.approx(3 * math.log(0.5), abs=1e-12)


def test_direct_hand_cases():
    c = certify_direct(const(np.diag([1.1, 1 / 1.1])))
    assert c.verdict is Verdict.BUNCHED and c.N == 1
    assert c.theta == pytest.approx(1.21 * 0.5)
    c = certify_direct(const(np.eye(2)))
    assert c.verdict is Verdict.BUNCHED and c.N == 1 and c.theta == pytest.approx(0.5) and c.L == 1
    c = certify_direct(const(np.diag([2.0, 0.5])), max_N=6)
    assert c.verdict is Verdict.NOT_BUNCHED
    assert c.eta == pytest.approx(math.log(2))


def test_periodic_hand_cases():
    orbs = enumerate_periodic_orbits(FULL2, 6)
    c = certify_periodic(const(np.diag([2.0, 0.5])), orbs)
    assert c.verdict is Verdict.NOT_BUNCHED and c.eta == pytest.approx(math.log(4) + math.log(0.5))
    c = certify_periodic(conformal(3), orbs)
    assert all(q == pytest.approx(math.log(0.5), abs=1e-12) for q in c.diagnostics["q"].values())


@pytest.mark.parametrize("seed", range(4))
def test_sweep_maximum_matches_exhaustive(seed):
    rng = np.random.default_rng(seed)
    cs = CocycleSystem(Generator.random_near(FULL2, 1, np.eye(2), 0.1, rng), HALF)
    c = certify_direct(cs, max_N=8)
    assert c.verdict is Verdict.BUNCHED
    assert c.diagnostics["max_a"] == pytest.approx(brute_max_a(cs, c.N), abs=1e-12)
    for n in range(1, c.N):
        assert brute_max_a(cs, n) >= 0


@pytest.mark.parametrize("seed", range(4))
def test_certified_bound_holds(seed):
    rng = np.random.default_rng(10 + seed)
    cs = CocycleSystem(Generator.random_near(FULL2, 1, np.eye(2), 0.1, rng), HALF)
    c = certify_direct(cs)
    for _ in range(30):
        x = random_point(FULL2, rng, 6)
        for n in range(1, 16):
            assert distortion(cs, x, n) * 0.5 ** n <= c.L * c.theta ** n * (1 + 1e-12)


def test_routes_agree_on_random_suite():
    rng = np.random.default_rng(20)
    orbs = enumerate_periodic_orbits(FULL2, 8)
    for _ in range(20):
        cs = CocycleSystem(Generator.random_near(FULL2, 1, np.eye(2), float(rng.uniform(0.02, 0.2)), rng), HALF)
        out = certify(cs, max_period=8)
        assert not out["contradiction"]
        assert out["direct"].verdict is Verdict.BUNCHED
        assert certify_periodic(cs, orbs).verdict is Verdict.BUNCHED


def test_require_bunched():
    with pytest.raises(UnbunchedInput):
        require_bunched(const(np.diag([2.0, 0.5])), max_N=4)


def test_power_certificate_bound():
    rng = np.random.default_rng(5)
    from cocylab.cocycle import power_system
    cs = CocycleSystem(Generator.random_near(FULL2, 1, np.eye(2), 0.15, rng), HALF)
    c = certify_direct(cs)
    pc = power_certificate(c, 3)
    pw, code = power_system(cs, 3)
    for _ in range(10):
        x = random_point(FULL2, rng, 6)
        y = code.blockify(x)
        for j in range(1, 5):
            assert distortion(pw, y, j) * pw.metric.alpha ** j <= pc.L * pc.theta ** j * (1 + 1e-12)


@given(st.integers(0, 2 ** 31), st.integers(1, 5), st.integers(1, 5))
def test_subadditivity(seed, n, k):
    rng = np.random.default_rng(seed)
    cs = CocycleSystem(Generator.random_near(FULL2, 1, np.eye(2), 0.4, rng), HALF)
    w = tuple(int(v) for v in rng.integers(0, 2, n + k + 2))
    lhs = subadditive_value(cs, w, n + k)
    rhs = subadditive_value(cs, w[:k + 2], k) + subadditive_value(cs, w[k:], n)
    assert lhs <= rhs + 1e-12


@given(st.integers(0, 2 ** 31))
def test_quantity_from_return_maps(seed):
    rng = np.random.default_rng(seed)
    cs = CocycleSystem(Generator.random_near(FULL2, 1, np.eye(2), 0.4, rng), HALF)
    from cocylab.cocycle import product_along_cyclic_word
    for p in enumerate_periodic_orbits(FULL2, 4):
        ev = np.abs(np.linalg.eigvals(product_along_cyclic_word(cs, p)))
        want = math.log(ev.max() / ev.min()) / p.period + math.log(0.5)
        assert orbit_quantity(product_along_cyclic_word(cs, p), p.period, HALF) == pytest.approx(want, abs=1e-12)
