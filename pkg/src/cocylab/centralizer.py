"""Commutants of return maps and the coset structure of transfer maps."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cocycle import CocycleSystem, product_along_cyclic_word
from .conjugacy import (CohomologyReport, ConjugacyField, Field, ProductField, verify_cohomology)
from .errors import CacheMismatch
from .numerics import Subspace, opnorm, solve_commutant, subspace_angle
from .sft import PeriodicOrbit, SftPoint

TOL_ANGLE = 1e-8


@dataclass(frozen=True)
class CommutantReport:
    orbit: str
    dims: tuple[tuple[int, int], ...]
    L_star: int
    stabilization: tuple[tuple[int, float], ...]
    containment: float
    d: int

    @property
    def M_claim(self) -> int:
        return self.L_star

    @property
    def stable(self) -> bool:
        return all(angle < TOL_ANGLE for _, angle in self.stabilization)

    def dim(self, k: int) -> int:
        return dict(self.dims)[k]

    def to_json(self) -> dict:
        return {
            "orbit": self.orbit,
            "d": self.d,
            "dims": [list(t) for t in self.dims],
            "L_star": self.L_star,
            "M_claim": self.M_claim,
            "stabilization": [{"k": k, "angle": a} for k, a in self.stabilization],
            "stable": self.stable,
            "containment": self.containment,
        }


def commutant_tower_matrix(m: np.ndarray, k_max: int = 12, label: str = "") -> CommutantReport:
    """Dimensions of the commutants of ``m^k`` for ``k = 1..k_max``.

    Powers are normalized by their norm before the nullspace solve so that
    the rank threshold is scale free. ``L_star`` is the first ``k`` with the
    largest dimension; ``V_{L_star}`` is then compared with ``V_{T L_star}``.
    """
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    m = np.asarray(m, dtype=float)
    d = m.shape[0]
    spaces: dict[int, Subspace] = {}
    power = np.eye(d)
    for k in range(1, k_max + 1):
        power = m @ power
        power = power / opnorm(power)
        spaces[k] = solve_commutant(power, power)
    dims = tuple((k, spaces[k].rank) for k in range(1, k_max + 1))
    top = max(r for _, r in dims)
    l_star = min(k for k, r in dims if r == top)
    stab = []
    for t in range(2, k_max // l_star + 1):
        stab.append((l_star * t, subspace_angle(spaces[l_star], spaces[l_star * t])))
    # V_k is contained in V_{kT}
    contain = 0.0
    for k in range(1, k_max + 1):
        for kt in range(2 * k, k_max + 1, k):
            u, v = spaces[k], spaces[kt]
            if u.rank:
                contain = max(contain, float(np.linalg.norm(u.basis - v.basis @ (v.basis.T @ u.basis), 2)))
    return CommutantReport(label, dims, l_star, tuple(stab), contain, d)


def commutant_tower(cs: CocycleSystem, p: PeriodicOrbit, k_max: int = 12) -> CommutantReport:
    return commutant_tower_matrix(product_along_cyclic_word(cs, p), k_max, p.to_json())


def centralizer_membership(a: CocycleSystem, d_field: Field, samples, depth: int = 12, n: int = 12,
                           step: int = 1) -> CohomologyReport:
    """Whether ``D`` satisfies ``A_x = D(shift x) A_x D(x)^-1`` (for ``A^step``)."""
    return verify_cohomology(a, a, d_field, samples, depth=depth, n=n, step=step)


@dataclass(frozen=True)
class CosetReport:
    quotient: CohomologyReport
    direct: CohomologyReport

    @property
    def agree(self) -> bool:
        return self.quotient.passed == self.direct.passed

    def to_json(self) -> dict:
        return {"agree": self.agree, "quotient_member": self.quotient.passed,
                "direct_pass": self.direct.passed, "quotient": self.quotient.to_json(),
                "direct": self.direct.to_json()}


def coset_test(a: CocycleSystem, b: CocycleSystem, c1: ConjugacyField, c2: ConjugacyField,
               samples, depth: int = 12, n: int = 12) -> CosetReport:
    """Test ``C2`` two ways: ``C1 C2^-1`` central for ``A``, and ``C2`` directly."""
    if c1.window != c2.window or c1.p0 != c2.p0:
        raise CacheMismatch(f"caches differ: windows {c1.window}/{c2.window}, base points {c1.p0}/{c2.p0}")
    quotient = centralizer_membership(a, ProductField(c1, c2), samples, depth, n)
    direct = verify_cohomology(a, b, c2, samples, depth=depth, n=n)
    return CosetReport(quotient, direct)
