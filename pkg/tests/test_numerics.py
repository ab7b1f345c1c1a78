import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cocylab.errors import SingularMatrix
from cocylab.numerics import (Subspace, distortion, eigen_moduli, inverse, matdist, opnorm,
                              solve_commutant, subspace_angle, subspace_intersect)

PHI = (1 + math.sqrt(5)) / 2


def rot(t):
    return np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])


def brute_commutant_dim(p, q):
    # independent route: rank of the Sylvester operator built column by column
    d = p.shape[0]
    cols = []
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d))
            e[i, j] = 1
            cols.append((p @ e - e @ q).ravel())
    s = np.linalg.svd(np.array(cols).T, compute_uv=False)
    return int(np.sum(s < 1e-9 * max(1.0, s[0])))


def test_opnorm_values():
    assert opnorm(np.eye(3)) == pytest.approx(1)
    assert opnorm(np.diag([3, 1 / 3])) == pytest.approx(3)
    assert opnorm(np.ones((2, 2))) == pytest.approx(2)


def test_matdist_values():
    assert matdist(np.eye(2), np.eye(2)) == 0
    assert matdist(np.eye(2), 2 * np.eye(2)) == pytest.approx(1.5)


def test_inverse_rejects_singular():
    with pytest.raises(SingularMatrix):
        inverse(np.ones((2, 2)))


def test_eigen_moduli_values():
    assert np.allclose(eigen_moduli(np.diag([2, -3])), [3, 2])
    assert np.allclose(eigen_moduli(rot(0.7)), [1, 1])
    assert np.allclose(eigen_moduli(np.array([[1, 1], [1, 0]])), [PHI, 1 / PHI])


@pytest.mark.parametrize("p,dim", [(np.diag([1.0, 2.0]), 2), (np.eye(2), 4), (2 * rot(1.0), 2)])
def test_commutant_dims(p, dim):
    assert solve_commutant(p, p).rank == dim == brute_commutant_dim(p, p)


def test_commutant_basis_solves():
    rng = np.random.default_rng(0)
    p = rng.standard_normal((3, 3))
    c = rng.standard_normal((3, 3))
    q = np.linalg.solve(c, p @ c)
    sp = solve_commutant(p, q)
    assert sp.rank == brute_commutant_dim(p, q) == 3
    for v in sp.basis.T:
        x = v.reshape(3, 3)
        assert opnorm(p @ x - x @ q) < 1e-10


def test_angles():
    e1, e2 = np.array([[1.0], [0.0]]), np.array([[0.0], [1.0]])
    u = Subspace.from_vectors(e1)
    assert subspace_angle(u, u) == 0
    assert subspace_angle(u, Subspace.from_vectors(e2)) == pytest.approx(math.pi / 2)
    assert subspace_angle(u, Subspace.from_vectors(np.array([[1.0], [1.0]]))) == pytest.approx(math.pi / 4)


def test_intersections():
    e = np.eye(3)
    u = Subspace.from_vectors(e[:, :2])
    v = Subspace.from_vectors(e[:, 1:])
    w = subspace_intersect(u, v)
    assert w.rank == 1 and subspace_angle(w, Subspace.from_vectors(e[:, 1:2])) < 1e-12
    assert subspace_angle(subspace_intersect(u, u), u) < 1e-12
    rng = np.random.default_rng(4)
    a = Subspace.from_vectors(rng.standard_normal((4, 2)))
    b = Subspace.from_vectors(rng.standard_normal((4, 2)))
    assert subspace_intersect(a, b).rank == 0


mats = st.integers(0, 2 ** 31).map(lambda s: np.random.default_rng(s).standard_normal((3, 3)) + 3 * np.eye(3))


@given(mats, mats)
def test_matdist_symmetric(a, b):
    assert matdist(a, b) == pytest.approx(matdist(b, a), rel=1e-12, abs=1e-14)


@given(mats)
def test_distortion_at_least_one(a):
    assert distortion(a) >= 1 - 1e-12
    assert distortion(a) == pytest.approx(np.linalg.cond(a), rel=1e-9)


@given(mats, st.floats(0.1, 10))
def test_commutant_scale_free(a, s):
    assert solve_commutant(a, a).rank == solve_commutant(s * a, s * a).rank
