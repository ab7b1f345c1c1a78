import numpy as np
import pytest
from hypothesis import given, strategies as st

from cocylab.bunching import certify_direct
from cocylab.cocycle import CocycleSystem, Generator, evaluate
from cocylab.errors import NotStableRelated
from cocylab.holonomy import (Kind, holonomy, holonomy_constant, oracle_product, partial_product,
                              stable_holonomy, unstable_holonomy, verify_holonomy_axioms)
from cocylab.numerics import opnorm
from cocylab.runner import holonomy_samples
from cocylab.sft import Metric, SftPoint, TransitionStructure, random_point, random_stable_partner

FULL2 = TransitionStructure.full_shift(2)
HALF = Metric(0.5, 1.0)


def test_same_point_is_identity(near_identity):
    x = random_point(FULL2, np.random.default_rng(0), 4)
    h = stable_holonomy(near_identity, x, x)
    assert np.array_equal(h.matrix, np.eye(2)) and h.depth == 0
    assert np.array_equal(unstable_holonomy(near_identity, x, x).matrix, np.eye(2))


def test_future_only_generator_is_trivial():
    rng = np.random.default_rng(1)
    mats = {w: np.eye(2) + 0.2 * rng.standard_normal((2, 2)) for w in [(a, b) for a in (0, 1) for b in (0, 1)]}
    gen = Generator.from_function(FULL2, 1, lambda w: mats[w[1:]])
    cs = CocycleSystem(gen, HALF)
    for _ in range(20):
        x = random_point(FULL2, rng, 4)
        y = random_stable_partner(FULL2, rng, x, -1)
        assert opnorm(stable_holonomy(cs, x, y).matrix - np.eye(2)) < 1e-13


def test_constant_generator_is_trivial():
    cs = CocycleSystem(Generator.constant(FULL2, np.array([[2.0, 1.0], [0.0, 0.5]])), HALF)
    rng = np.random.default_rng(2)
    pairs, triples = holonomy_samples(FULL2, rng, 20, Kind.STABLE, 5)
    rep = verify_holonomy_axioms(cs, pairs, triples, Kind.STABLE)
    assert rep.composition < 1e-12 and rep.inverse < 1e-12 and rep.stabilization < 1e-12


def test_unrelated_points_raise(near_identity):
    x = SftPoint.periodic((0,))
    y = SftPoint.periodic((1,))
    with pytest.raises(NotStableRelated):
        stable_holonomy(near_identity, x, y)


@pytest.mark.parametrize("kind", [Kind.STABLE, Kind.UNSTABLE])
def test_stabilization_against_long_oracle(near_identity, kind):
    rng = np.random.default_rng(3)
    pairs, _ = holonomy_samples(FULL2, rng, 40, kind, 0)
    for x, y in pairs:
        h = holonomy(near_identity, x, y, kind)
        for n in (h.depth, h.depth + 5, 30, 50):
            # extended-precision oracle; every partial product beyond the depth is frozen
            ref = oracle_product(near_identity, x, y, kind, n)
            assert opnorm(ref - h.matrix) / opnorm(h.matrix) < 1e-13


def test_partial_products_freeze(near_identity):
    rng = np.random.default_rng(4)
    x = random_point(FULL2, rng, 4)
    y = random_stable_partner(FULL2, rng, x, 2)
    h = stable_holonomy(near_identity, x, y)
    for n in range(h.depth, h.depth + 10):
        assert opnorm(partial_product(near_identity, x, y, Kind.STABLE, n) - h.matrix) < 1e-12


def test_axioms_and_h4(near_identity):
    cert = certify_direct(near_identity)
    rng = np.random.default_rng(5)
    for kind in (Kind.STABLE, Kind.UNSTABLE):
        pairs, triples = holonomy_samples(FULL2, rng, 60, kind, 20)
        rep = verify_holonomy_axioms(near_identity, pairs, triples, kind, cert)
        assert rep.composition < 1e-11 and rep.equivariance < 1e-11 and rep.inverse < 1e-11
        assert rep.stabilization < 1e-13
        assert rep.h4_ok and rep.counts["local_pairs"] > 0


def test_h4_constant_finite(near_identity):
    cert = certify_direct(near_identity)
    c = holonomy_constant(near_identity, cert)
    assert 0 < c < np.inf


@given(st.integers(0, 2 ** 31), st.integers(-3, 3), st.integers(-3, 3))
def test_composition_property(seed, c1, c2):
    rng = np.random.default_rng(seed)
    cs = CocycleSystem(Generator.random_near(FULL2, 1, np.eye(2), 0.2, rng), HALF)
    x = random_point(FULL2, rng, 4)
    y = random_stable_partner(FULL2, rng, x, c1)
    z = random_stable_partner(FULL2, rng, y, c2)
    hxy, hyz, hxz = (stable_holonomy(cs, *p).matrix for p in ((x, y), (y, z), (x, z)))
    assert opnorm(hyz @ hxy - hxz) < 1e-11


@given(st.integers(0, 2 ** 31), st.integers(-3, 3), st.integers(-8, 8))
def test_equivariance_property(seed, cut, n):
    rng = np.random.default_rng(seed)
    cs = CocycleSystem(Generator.random_near(FULL2, 1, np.eye(2), 0.2, rng), HALF)
    x = random_point(FULL2, rng, 4)
    y = random_stable_partner(FULL2, rng, x, cut)
    from cocylab.sft import shift
    h = stable_holonomy(cs, x, y).matrix
    hn = stable_holonomy(cs, shift(x, n), shift(y, n)).matrix
    assert opnorm(h - np.linalg.inv(evaluate(cs, y, n)) @ hn @ evaluate(cs, x, n)) < 1e-11
