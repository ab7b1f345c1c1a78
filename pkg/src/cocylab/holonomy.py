"""Stable and unstable holonomies of windowed cocycles.

For a generator of window radius ``m`` the factors ``A(shift^j x)`` and
``A(shift^j y)`` coincide once the windows lie inside the region where ``x``
and ``y`` agree, so the defining limits are reached after finitely many steps:

* stable, ``x[i] == y[i]`` for ``i >= R``: ``H = (A^K_y)^-1 A^K_x`` with ``K = R + m``;
* unstable, ``x[i] == y[i]`` for ``i <= -R``: ``H = (A^-K_y)^-1 A^-K_x``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .bunching import BunchingCertificate, Verdict
from .cocycle import CocycleSystem, evaluate, holder_constant, max_norms
from .errors import NotStableRelated, NotUnstableRelated
from .numerics import inverse, opnorm
from .sft import SftPoint, d_alpha, shift, stable_radius, unstable_radius


class Kind(str, Enum):
    STABLE = "STABLE"
    UNSTABLE = "UNSTABLE"


@dataclass(frozen=True, eq=False)
class HolonomyMap:
    matrix: np.ndarray
    source: SftPoint
    target: SftPoint
    kind: Kind
    depth: int
    formal: bool = True
    h4_ratio: float | None = None

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "from": self.source.to_json(),
            "to": self.target.to_json(),
            "depth": self.depth,
            "formal": self.formal,
            "matrix": self.matrix.tolist(),
            "h4_ratio": self.h4_ratio,
        }


def holonomy_constant(cs: CocycleSystem, cert: BunchingCertificate) -> float:
    """Certified ``c`` with ``||H_{x,y} - I|| <= c d(x, y)^beta`` on local pairs.

    Writing ``P_n = (A^n_y)^-1 A^n_x`` one has ``P_{n+1} = (I + E_n) P_n`` with
    ``||E_n|| <= K(A^n_y) M c_A d(shift^n x, shift^n y)^beta <= M c_A L theta^n d^beta``
    where ``M`` bounds every ``||A^+-1||``. Hence ``||H - I|| <= exp(S d^beta) - 1``
    with ``S = M c_A L / (1 - theta)``, and local pairs have ``d <= alpha``.
    The unstable case is the same argument for the inverse cocycle.
    """
    if cert.verdict is not Verdict.BUNCHED or cert.theta is None:
        return math.inf
    big_m = max(max_norms(cs.gen))
    s = big_m * holder_constant(cs) * cert.L / (1.0 - cert.theta)
    # local pairs differ at a nonzero index, so t = d^beta <= alpha^beta and
    # (exp(s t) - 1) / t is increasing in t
    t = cs.metric.alpha ** cs.metric.beta
    return math.expm1(s * t) / t


def stable_depth(cs: CocycleSystem, x: SftPoint, y: SftPoint) -> int:
    r = stable_radius(x, y)
    if r is None:
        raise NotStableRelated(f"{y} is not in the stable set of {x}")
    return max(0, r + cs.radius)


def unstable_depth(cs: CocycleSystem, x: SftPoint, y: SftPoint) -> int:
    r = unstable_radius(x, y)
    if r is None:
        raise NotUnstableRelated(f"{y} is not in the unstable set of {x}")
    return max(0, r + cs.radius)


def _local(x: SftPoint, y: SftPoint, kind: Kind) -> bool:
    r = stable_radius(x, y) if kind is Kind.STABLE else unstable_radius(x, y)
    return r is not None and r <= 0


def _finish(cs, mat, x, y, kind, depth, cert) -> HolonomyMap:
    formal = cert is None or cert.verdict is not Verdict.BUNCHED
    ratio = None
    if not formal and x != y and _local(x, y, kind):
        ratio = opnorm(mat - np.eye(cs.d)) / d_alpha(x, y, cs.metric) ** cs.metric.beta
    return HolonomyMap(mat, x, y, kind, depth, formal, ratio)


def stable_holonomy(cs: CocycleSystem, x: SftPoint, y: SftPoint,
                    cert: BunchingCertificate | None = None) -> HolonomyMap:
    """``lim (A^n_y)^-1 A^n_x``, evaluated exactly at the stabilization depth."""
    k = stable_depth(cs, x, y)
    mat = inverse(evaluate(cs, y, k)) @ evaluate(cs, x, k) if k else np.eye(cs.d)
    return _finish(cs, mat, x, y, Kind.STABLE, k, cert)


def unstable_holonomy(cs: CocycleSystem, x: SftPoint, y: SftPoint,
                      cert: BunchingCertificate | None = None) -> HolonomyMap:
    """``lim A^n_{shift^-n y} (A^n_{shift^-n x})^-1`` at the stabilization depth."""
    k = unstable_depth(cs, x, y)
    mat = inverse(evaluate(cs, y, -k)) @ evaluate(cs, x, -k) if k else np.eye(cs.d)
    return _finish(cs, mat, x, y, Kind.UNSTABLE, k, cert)


def holonomy(cs, x, y, kind: Kind | str, cert=None) -> HolonomyMap:
    kind = Kind(kind)
    fn = stable_holonomy if kind is Kind.STABLE else unstable_holonomy
    return fn(cs, x, y, cert)


def partial_product(cs: CocycleSystem, x: SftPoint, y: SftPoint, kind: Kind | str, n: int) -> np.ndarray:
    """Truncation of the defining limit at step ``n`` (no stabilization shortcut)."""
    if Kind(kind) is Kind.STABLE:
        return inverse(evaluate(cs, y, n)) @ evaluate(cs, x, n)
    return inverse(evaluate(cs, y, -n)) @ evaluate(cs, x, -n)


def _ext_inverse(m: np.ndarray) -> np.ndarray:
    """Gauss-Jordan inverse with partial pivoting in extended precision."""
    d = m.shape[0]
    a = np.concatenate([m.astype(np.longdouble), np.eye(d, dtype=np.longdouble)], axis=1)
    for c in range(d):
        p = c + int(np.argmax(np.abs(a[c:, c])))
        a[[c, p]] = a[[p, c]]
        a[c] = a[c] / a[c, c]
        for r in range(d):
            if r != c:
                a[r] = a[r] - a[r, c] * a[c]
    return a[:, d:]


def _ext_product(cs: CocycleSystem, x: SftPoint, n: int) -> np.ndarray:
    gen = cs.gen
    out = np.eye(cs.d, dtype=np.longdouble)
    if n >= 0:
        for j in range(n):
            out = gen.at(shift(x, j)).astype(np.longdouble) @ out
    else:
        for j in range(-1, n - 1, -1):
            out = _ext_inverse(gen.at(shift(x, j))) @ out
    return out


def oracle_product(cs: CocycleSystem, x: SftPoint, y: SftPoint, kind: Kind | str, n: int) -> np.ndarray:
    """Truncated limit at step ``n`` accumulated in extended precision.

    Long products of non-conformal factors lose accuracy in double precision
    when inverted; this oracle keeps the truncation error separate from
    rounding so that it can certify stabilization to ``1e-13``.
    """
    sgn = 1 if Kind(kind) is Kind.STABLE else -1
    out = _ext_inverse(_ext_product(cs, y, sgn * n)) @ _ext_product(cs, x, sgn * n)
    return out.astype(float)


@dataclass
class AxiomReport:
    kind: Kind
    composition: float = 0.0
    equivariance: float = 0.0
    inverse: float = 0.0
    stabilization: float = 0.0
    h4_max_ratio: float = 0.0
    h4_constant: float | None = None
    h4_ok: bool | None = None
    counts: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "composition": self.composition,
            "equivariance": self.equivariance,
            "inverse": self.inverse,
            "stabilization": self.stabilization,
            "h4_max_ratio": self.h4_max_ratio,
            "h4_constant": self.h4_constant,
            "h4_ok": self.h4_ok,
            "counts": self.counts,
        }


def verify_holonomy_axioms(cs: CocycleSystem, pairs: Sequence[tuple[SftPoint, SftPoint]],
                           triples: Sequence[tuple[SftPoint, SftPoint, SftPoint]] = (),
                           kind: Kind | str = Kind.STABLE,
                           cert: BunchingCertificate | None = None,
                           n_max: int = 10, oracle_depth: int = 50) -> AxiomReport:
    """Residuals of the holonomy axioms on sampled related points.

    * composition ``H_{y,z} H_{x,y} = H_{x,z}`` on triples;
    * equivariance ``H_{x,y} = (A^n_y)^-1 H_{shift^n x, shift^n y} A^n_x`` for
      ``0 < |n| <= n_max``;
    * inverse ``H_{y,x} H_{x,y} = I``;
    * stabilization against the truncated limit at ``oracle_depth`` (relative);
    * the Hoelder bound ``||H - I|| <= c d(x, y)^beta`` on local pairs.
    """
    kind = Kind(kind)
    rep = AxiomReport(kind)
    eye = np.eye(cs.d)
    for x, y, z in triples:
        hxy = holonomy(cs, x, y, kind).matrix
        hyz = holonomy(cs, y, z, kind).matrix
        hxz = holonomy(cs, x, z, kind).matrix
        rep.composition = max(rep.composition, opnorm(hyz @ hxy - hxz))
    local = 0
    for x, y in pairs:
        h = holonomy(cs, x, y, kind)
        rep.inverse = max(rep.inverse, opnorm(holonomy(cs, y, x, kind).matrix @ h.matrix - eye))
        for n in list(range(1, n_max + 1)) + list(range(-n_max, 0)):
            hn = holonomy(cs, shift(x, n), shift(y, n), kind).matrix
            rhs = inverse(evaluate(cs, y, n)) @ hn @ evaluate(cs, x, n)
            rep.equivariance = max(rep.equivariance, opnorm(h.matrix - rhs))
        if h.depth <= oracle_depth:
            oracle = oracle_product(cs, x, y, kind, oracle_depth)
            rep.stabilization = max(rep.stabilization, opnorm(oracle - h.matrix) / opnorm(h.matrix))
        if x != y and _local(x, y, kind):
            local += 1
            ratio = opnorm(h.matrix - eye) / d_alpha(x, y, cs.metric) ** cs.metric.beta
            rep.h4_max_ratio = max(rep.h4_max_ratio, ratio)
    if cert is not None:
        rep.h4_constant = holonomy_constant(cs, cert)
        rep.h4_ok = rep.h4_max_ratio <= rep.h4_constant
    rep.counts = {"pairs": len(pairs), "triples": len(triples), "local_pairs": local}
    return rep
