import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cocylab.errors import NoFixedPoint, NotMixingError
from cocylab.sft import (BlockCode, Metric, PeriodicOrbit, SftPoint, TransitionStructure, bracket,
                         closing_orbit, closing_point, connector, count_periodic_points, d_alpha,
                         enumerate_periodic_orbits, first_difference, fixed_point, format_word,
                         homoclinic_points, homoclinic_surrogate, parse_word, random_point,
                         random_stable_partner, random_unstable_partner, shift, stable_radius,
                         unstable_radius, validate_mixing)


def brute_mixing(q, top=20):
    m = np.array(q)
    p = m.copy()
    for n in range(1, top):
        if (p > 0).all():
            return n
        p = (p @ m > 0).astype(int)
    return None


def brute_cyclic_words(q, n):
    k = len(q)
    out = []
    for w in itertools.product(range(k), repeat=n):
        if all(q[w[i]][w[(i + 1) % n]] for i in range(n)):
            out.append(w)
    return out


def brute_orbits(q, n):
    """Primitive cyclic classes of length n by brute force."""
    seen = set()
    for w in brute_cyclic_words(q, n):
        rots = {w[i:] + w[:i] for i in range(n)}
        if len(rots) == n:
            seen.add(min(rots))
    return seen


# -- mixing

def test_full_shift_mixes_at_one(full2):
    assert validate_mixing(full2) == 1


def test_golden_mean_mixes_at_two(golden):
    assert validate_mixing(golden) == 2


def test_period_two_structure_is_not_mixing():
    with pytest.raises(NotMixingError):
        validate_mixing(TransitionStructure.from_matrix([[0, 1], [1, 0]]))


def test_reducible_is_not_mixing():
    with pytest.raises(NotMixingError):
        validate_mixing(TransitionStructure.from_matrix([[1, 1], [0, 1]]))


@pytest.mark.parametrize("q", [[[1, 1, 0], [0, 0, 1], [1, 0, 0]], [[0, 1, 1], [1, 0, 1], [1, 1, 0]],
                               [[1, 1, 1], [1, 0, 0], [0, 1, 0]]])
def test_mixing_power_matches_brute_force(q):
    assert validate_mixing(TransitionStructure.from_matrix(q)) == brute_mixing(q)


# -- words and points

def test_word_format_roundtrip():
    assert format_word((0, 1, 1)) == "011"
    assert parse_word("011") == (0, 1, 1)
    assert parse_word(format_word((3, 12, 0))) == (3, 12, 0)


def test_canonical_points_compare_equal():
    a = SftPoint.build((0,), (1,), 0, (0,))
    b = SftPoint.build((0, 0), (0, 1, 0), -1, (0, 0, 0))
    assert a == b and hash(a) == hash(b)


def test_json_roundtrip():
    x = SftPoint.build((0, 1), (1, 1, 0), -2, (1,))
    assert SftPoint.from_json(x.to_json()) == x


def test_distance_hand_values(half):
    x = SftPoint.periodic((0,))
    y = SftPoint.homoclinic(0, (1,), 3)
    assert d_alpha(x, x, half) == 0
    assert d_alpha(x, y, half) == pytest.approx(0.125)
    assert first_difference(x, y) == 3


def test_shift_basics():
    p = SftPoint.periodic((0,))
    assert shift(p, 7) == p
    x = SftPoint.build((0,), (1, 0, 1), 0, (1,))
    assert shift(x, 0) == x
    orb = PeriodicOrbit.from_word((0, 1, 1))
    assert shift(orb.point(), 3) == orb.point()
    assert shift(shift(x, 5), -5) == x
    assert shift(x, 2)[0] == x[2]


# -- bracket

def test_bracket_hand_example():
    x = SftPoint.homoclinic(0, (1,), 0)
    y = SftPoint.periodic((1,))
    z = bracket(x, y)
    assert all(z[i] == 1 for i in range(-6, 1))
    assert all(z[i] == x[i] for i in range(0, 8))


def test_bracket_idempotent():
    x = SftPoint.build((0, 1), (1,), 0, (1, 0, 0))
    assert bracket(x, x) == x


# -- periodic orbits

def test_orbits_full2_small():
    orbs = enumerate_periodic_orbits(TransitionStructure.full_shift(2), 3)
    by = {n: [o for o in orbs if o.period == n] for n in (1, 2, 3)}
    assert len(by[1]) == 2 and len(by[2]) == 1 and len(by[3]) == 2


@pytest.mark.parametrize("q", [[[1, 1], [1, 0]], [[1, 1], [1, 1]], [[1, 1, 0], [0, 0, 1], [1, 1, 1]]])
def test_orbits_match_brute_force(q):
    ts = TransitionStructure.from_matrix(q)
    orbs = enumerate_periodic_orbits(ts, 7)
    for n in range(1, 8):
        assert {o.word for o in orbs if o.period == n} == brute_orbits(q, n)
        trace = int(np.trace(np.linalg.matrix_power(np.array(q), n)))
        assert count_periodic_points(orbs, n) == trace == len(brute_cyclic_words(q, n))


def test_golden_traces(golden):
    orbs = enumerate_periodic_orbits(golden, 3)
    assert [count_periodic_points(orbs, n) for n in (1, 2, 3)] == [1, 3, 4]


def test_fixed_point_missing():
    with pytest.raises(NoFixedPoint):
        fixed_point(TransitionStructure.from_matrix([[0, 1, 1], [1, 0, 1], [1, 1, 0]]))


# -- homoclinic points and closing

def test_homoclinic_window_zero_and_one(full2):
    p0 = PeriodicOrbit((0,))
    assert homoclinic_points(full2, p0, 0) == [SftPoint.periodic((0,))]
    pts = homoclinic_points(full2, p0, 1)
    assert set(pts) == {SftPoint.periodic((0,)), SftPoint.homoclinic(0, (1,), 0)}


@pytest.mark.parametrize("window", [2, 3, 4])
def test_homoclinic_points_against_enumeration(full2, window):
    pts = homoclinic_points(full2, PeriodicOrbit((0,)), window)
    assert len(set(pts)) == len(pts)
    for x in pts:
        assert x.is_homoclinic_to(0)
        assert len(x.core) <= window


def test_closing_hand_example():
    x = SftPoint.homoclinic(0, (1,), 0)
    assert closing_orbit(x, 2) == PeriodicOrbit.from_word((0, 0, 1, 0))
    q = closing_point(x, 2)
    assert q.window(-2, 1) == x.window(-2, 1)
    assert d_alpha(x, q, 0.5) <= 0.5 ** 2


def test_closing_fixed_point():
    p = SftPoint.periodic((1,))
    assert closing_orbit(p, 5) == PeriodicOrbit((1,))


def test_connector_is_shortest(golden):
    assert connector(golden, 1, 1) == (0,)
    assert golden.is_admissible((1,) + connector(golden, 1, 1) + (1,))


def test_surrogate_agrees_on_window(full2):
    rng = np.random.default_rng(1)
    for _ in range(20):
        x = random_point(full2, rng, 6)
        h = homoclinic_surrogate(full2, 0, x, 4)
        assert h.window(-4, 4) == x.window(-4, 4)
        assert h.is_homoclinic_to(0)


def test_block_code_roundtrip(golden):
    code = BlockCode(golden, 3)
    rng = np.random.default_rng(2)
    for _ in range(10):
        x = random_point(golden, rng, 5)
        assert code.unblockify(code.blockify(x)) == x


# -- properties

@st.composite
def points(draw, ts=TransitionStructure.from_matrix([[1, 1], [1, 0]])):
    seed = draw(st.integers(0, 2 ** 31))
    return random_point(ts, np.random.default_rng(seed), draw(st.integers(0, 6)))


@given(points(), st.integers(-12, 12))
def test_shift_composition(x, n):
    assert shift(shift(x, n), -n) == x
    assert all(shift(x, n)[i] == x[i + n] for i in range(-5, 6))


@given(points(), points())
def test_bracket_past_and_future(x, y):
    if x[0] != y[0]:
        return
    z = bracket(x, y)
    assert all(z[i] == y[i] for i in range(-10, 1))
    assert all(z[i] == x[i] for i in range(0, 11))


@given(st.integers(0, 2 ** 31), st.integers(-4, 4))
def test_stable_partner_contracts(seed, cut):
    ts = TransitionStructure.full_shift(2)
    rng = np.random.default_rng(seed)
    x = random_point(ts, rng, 4)
    y = random_stable_partner(ts, rng, x, cut)
    assert stable_radius(x, y) is not None
    met = Metric(0.5)
    if stable_radius(x, y) <= 0 and x != y:
        d0 = d_alpha(x, y, met)
        for n in range(6):
            assert d_alpha(shift(x, n), shift(y, n), met) <= 0.5 ** n * d0 * (1 + 1e-12)


@given(st.integers(0, 2 ** 31), st.integers(-4, 4))
def test_unstable_partner_related(seed, cut):
    ts = TransitionStructure.full_shift(2)
    rng = np.random.default_rng(seed)
    x = random_point(ts, rng, 4)
    y = random_unstable_partner(ts, rng, x, cut)
    assert unstable_radius(x, y) is not None
    assert all(x[i] == y[i] for i in range(cut - 8, cut + 1))


@given(points(), points(), points())
def test_metric_is_ultrametric(x, y, z):
    met = Metric(0.5)
    assert d_alpha(x, z, met) <= max(d_alpha(x, y, met), d_alpha(y, z, met)) + 1e-15
    assert d_alpha(x, y, met) == d_alpha(y, x, met)
