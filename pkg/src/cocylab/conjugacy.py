"""Transfer maps between cocycles with matching periodic data.

Given cocycles ``A`` and ``B`` over the same shift, a fixed point ``p`` and a
matrix ``C_p`` with ``A_p = C_p B_p C_p^-1``, the candidate transfer map on a
homoclinic point ``x`` of ``p`` is

    ``C(x) = H^{A,s}_{p,x} C_p H^{B,s}_{x,p}``.

It extends to a global solution of ``A_x = C(shift x) B_x C(x)^-1`` exactly
when the periodic cycle functionals ``H^s_{x,p} H^u_{p,x}`` of the two
cocycles are conjugate by ``C_p``. Points that are not homoclinic are
evaluated through a homoclinic point sharing a long central window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .bunching import BunchingCertificate, Verdict, certify_direct
from .cocycle import CocycleSystem, Generator, evaluate
from .errors import (ConditionAFailed, ConditionBFailed, DimensionMismatch, MissingOrbitData,
                     NotCoprime, ResidualFail, UnbunchedInput)
from .holonomy import stable_holonomy, unstable_holonomy
from .numerics import eigen_moduli, inverse, opnorm, solve_commutant, unvec
from .sft import (BlockCode, PeriodicOrbit, SftPoint, closing_orbit, closing_point,
                  homoclinic_points, homoclinic_surrogate, shift, symbol_array)

TOL_EQ = 1e-9
TOL_CONJ = 1e-9
TOL_PCF = 1e-8
TOL_COHOMOLOGY = 1e-8
HOLDER_DRIFT = 0.05
LOG_FLOOR = 1e-14


# --------------------------------------------------------------------------
# periodic data


@dataclass(frozen=True, eq=False)
class OrbitMatch:
    orbit: PeriodicOrbit
    residual: float
    passed: bool
    conjugator: np.ndarray | None = None
    commutant_dim: int | None = None
    reason: str = ""

    def to_json(self) -> dict:
        out = {"orbit": self.orbit.to_json(), "residual": self.residual, "pass": self.passed}
        if self.commutant_dim is not None:
            out["commutant_dim"] = self.commutant_dim
        if self.conjugator is not None:
            out["conjugator"] = self.conjugator.tolist()
        if self.reason:
            out["reason"] = self.reason
        return out


@dataclass(frozen=True, eq=False)
class PeriodicMatchReport:
    mode: str
    orbits: tuple[OrbitMatch, ...]

    @property
    def passed(self) -> bool:
        return all(o.passed for o in self.orbits)

    @property
    def max_residual(self) -> float:
        return max((o.residual for o in self.orbits), default=0.0)

    def conjugators(self) -> dict:
        return {o.orbit: o.conjugator for o in self.orbits if o.conjugator is not None}

    def to_json(self) -> dict:
        return {"mode": self.mode, "pass": self.passed, "max_residual": self.max_residual,
                "orbits": [o.to_json() for o in self.orbits]}


def _table_scale(a: CocycleSystem, b: CocycleSystem, k: int) -> float:
    top = max(float(np.max(np.linalg.norm(a.gen.mats, 2, axis=(-2, -1)))),
              float(np.max(np.linalg.norm(b.gen.mats, 2, axis=(-2, -1)))))
    return max(1.0, top) ** k


def solve_conjugator(p: np.ndarray, q: np.ndarray, seed: int = 0, tries: int = 32,
                     tol_invertible: float = 1e-8) -> tuple[np.ndarray | None, int]:
    """Invertible ``X`` with ``P X = X Q`` closest to the identity, and the solution dimension.

    The orthogonal projection of ``I`` onto the solution space is used when it
    is invertible; otherwise seeded random combinations of a basis are tried.
    """
    d = p.shape[0]
    space = solve_commutant(p, q)
    if space.rank == 0:
        return None, 0
    basis = space.basis
    cand = unvec(basis @ (basis.T @ np.eye(d).reshape(-1)), d)

    def ok(x):
        s = np.linalg.svd(x, compute_uv=False)
        return s[-1] > tol_invertible * s[0]

    if ok(cand):
        return cand, space.rank
    rng = np.random.default_rng(seed)
    for _ in range(tries):
        x = unvec(basis @ rng.standard_normal(space.rank), d)
        if ok(x):
            return x / opnorm(x), space.rank
    return None, space.rank


def match_periodic_data(a: CocycleSystem, b: CocycleSystem, orbits: Iterable[PeriodicOrbit],
                        mode: str = "EQUAL", tol_scale: float = 1.0) -> PeriodicMatchReport:
    """Compare return maps orbit by orbit.

    EQUAL checks ``A_p = B_p``. CONJUGATE compares spectra and then solves
    ``A_p X = X B_p`` for a canonical invertible ``X``.
    """
    if a.d != b.d:
        raise DimensionMismatch(f"dimensions {a.d} and {b.d}")
    mode = mode.upper()
    if mode not in ("EQUAL", "CONJUGATE"):
        raise ValueError(f"unknown mode {mode}")
    out = []
    for p in orbits:
        ap = evaluate(a, p.point(), p.period)
        bp = evaluate(b, p.point(), p.period)
        scale = _table_scale(a, b, p.period)
        if mode == "EQUAL":
            res = opnorm(ap - bp)
            out.append(OrbitMatch(p, res, res < TOL_EQ * tol_scale * scale))
            continue
        ma, mb = eigen_moduli(ap), eigen_moduli(bp)
        spec = float(np.max(np.abs(ma - mb) / np.maximum(ma, mb)))
        if spec > 1e-8 * tol_scale:
            out.append(OrbitMatch(p, spec, False, reason="SPECTRA_DIFFER"))
            continue
        x, dim = solve_conjugator(ap, bp)
        if x is None:
            out.append(OrbitMatch(p, math.inf, False, commutant_dim=dim, reason="NO_INVERTIBLE_SOLUTION"))
            continue
        res = opnorm(ap @ x - x @ bp) / max(opnorm(ap), 1.0)
        out.append(OrbitMatch(p, res, res < TOL_CONJ * tol_scale * scale, x, dim))
    return PeriodicMatchReport(mode, tuple(out))


# --------------------------------------------------------------------------
# periodic cycle functionals


@dataclass(frozen=True, eq=False)
class PcfValue:
    point: SftPoint
    matrix: np.ndarray
    system_label: str = ""


def _fixed_point(p0: PeriodicOrbit) -> SftPoint:
    if p0.period != 1:
        raise ValueError(f"{p0} is not a fixed point")
    return p0.point()


def pcf(cs: CocycleSystem, p0: PeriodicOrbit, x: SftPoint) -> PcfValue:
    """``H^s_{x,p} H^u_{p,x}`` at a homoclinic point ``x`` of the fixed point ``p``."""
    p = _fixed_point(p0)
    mat = stable_holonomy(cs, x, p).matrix @ unstable_holonomy(cs, p, x).matrix
    return PcfValue(x, mat, cs.label)


@dataclass(frozen=True, eq=False)
class ConditionBReport:
    residual: float
    tolerance: float
    condition_a: float
    window: int
    points: int
    worst_point: SftPoint | None

    @property
    def passed(self) -> bool:
        return self.residual < self.tolerance

    def to_json(self) -> dict:
        return {
            "pass": self.passed,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "condition_a": self.condition_a,
            "window": self.window,
            "points": self.points,
            "worst_point": None if self.worst_point is None else self.worst_point.to_json(),
        }


def check_condition_a(a: CocycleSystem, b: CocycleSystem, p0: PeriodicOrbit, c_p,
                      tol_scale: float = 1.0) -> float:
    """``||A_p - C_p B_p C_p^-1||``; raises ConditionAFailed when too large."""
    p = _fixed_point(p0)
    c_p = np.asarray(c_p, dtype=float)
    ap, bp = a.at(p), b.at(p)
    res = opnorm(ap - c_p @ bp @ inverse(c_p))
    scale = max(1.0, opnorm(ap)) * max(1.0, opnorm(c_p) * opnorm(inverse(c_p)))
    if res > TOL_CONJ * tol_scale * scale:
        raise ConditionAFailed(f"fixed-point matrices are not conjugate by C_p: residual {res:.3e}")
    return res


def check_condition_b(a: CocycleSystem, b: CocycleSystem, p0: PeriodicOrbit, c_p, window: int,
                      tol_scale: float = 1.0) -> ConditionBReport:
    """Largest ``||pcf^A(x) - C_p pcf^B(x) C_p^-1||`` over homoclinic points up to ``window``."""
    c_p = np.asarray(c_p, dtype=float)
    cond_a = check_condition_a(a, b, p0, c_p, tol_scale)
    ci = inverse(c_p)
    worst, where, top = 0.0, None, 1.0
    pts = homoclinic_points(a.ts, p0, window)
    for x in pts:
        pa = pcf(a, p0, x).matrix
        pb = c_p @ pcf(b, p0, x).matrix @ ci
        top = max(top, opnorm(pa), opnorm(pb))
        r = opnorm(pa - pb)
        if r > worst:
            worst, where = r, x
    tol = TOL_PCF * tol_scale * top
    return ConditionBReport(worst, tol, cond_a, window, len(pts), where)


# --------------------------------------------------------------------------
# fields


class Field:
    """A matrix-valued function on the shift, evaluated at finite resolution.

    ``evaluate(x, n)`` returns ``(C, r)`` where ``C`` approximates the value at
    ``x`` using the symbols on ``[-n, n]`` and ``r`` bounds the error (0 when
    the value is exact).
    """

    verified: bool = False
    label: str = ""

    def evaluate(self, x: SftPoint, n: int) -> tuple[np.ndarray, float]:
        raise NotImplementedError

    def __call__(self, x: SftPoint, n: int = 12) -> np.ndarray:
        return self.evaluate(x, n)[0]


class ConstantField(Field):
    def __init__(self, mat, label: str = "constant"):
        self.mat = np.asarray(mat, dtype=float)
        self.verified = True
        self.label = label

    def evaluate(self, x, n):
        return self.mat, 0.0


class LocalField(Field):
    """Exact field given by a locally constant Generator."""

    def __init__(self, gen: Generator, label: str = "local"):
        self.gen = gen
        self.verified = True
        self.label = label

    def evaluate(self, x, n):
        return self.gen.at(x), 0.0


class ProductField(Field):
    """Pointwise ``F(x) G(x)^-1``."""

    def __init__(self, f: Field, g: Field, label: str = "quotient"):
        self.f, self.g = f, g
        self.verified = f.verified and g.verified
        self.label = label

    def evaluate(self, x, n):
        cf, rf = self.f.evaluate(x, n)
        cg, rg = self.g.evaluate(x, n)
        gi = inverse(cg)
        radius = rf * opnorm(gi) + opnorm(cf) * opnorm(gi) ** 2 * rg
        return cf @ gi, radius


class PowerView(Field):
    """A field over the block presentation of ``shift^N``, read on base points."""

    def __init__(self, inner: Field, code: BlockCode, label: str | None = None):
        self.inner = inner
        self.code = code
        self.verified = inner.verified
        self.label = label or f"{inner.label}@N={code.n}"

    def evaluate(self, x, n):
        y = self.code.blockify(x)
        return self.inner.evaluate(y, max(1, (n - self.code.n + 1) // self.code.n))


@dataclass(frozen=True)
class HolderStats:
    estimate: float
    estimate_small: float | None
    stable: bool
    m_prime: float

    def to_json(self) -> dict:
        return {"holder_estimate": self.estimate, "holder_estimate_window_minus_2": self.estimate_small,
                "holder_stable": self.stable, "status": "OK" if self.stable else "NON_HOLDER_SUSPECT",
                "M_prime": self.m_prime}


def _first_difference_matrix(sym_i: np.ndarray, syms: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """``min |i|`` of disagreement between one row and many rows (inf if equal)."""
    diff = syms != sym_i
    absidx = np.where(diff, np.abs(idx)[None, :], np.iinfo(np.int64).max)
    return absidx.min(axis=1)


def holder_estimate(points: Sequence[SftPoint], mats: np.ndarray, alpha: float, beta: float,
                    span: int) -> float:
    """``max matdist(C(x), C(y)) / d(x, y)^beta`` over all pairs.

    All points must equal their tail symbol outside ``[-span, span]``.
    """
    n = len(points)
    if n < 2:
        return 0.0
    syms = symbol_array(points, -span - 1, span + 1).astype(np.int64)
    idx = np.arange(-span - 1, span + 2)
    invs = np.linalg.inv(mats)
    best = 0.0
    for i in range(n - 1):
        r = _first_difference_matrix(syms[i], syms[i + 1:], idx)
        d = np.power(alpha, r.astype(float) * beta)
        dist = (np.linalg.norm(mats[i] - mats[i + 1:], 2, axis=(-2, -1))
                + np.linalg.norm(invs[i] - invs[i + 1:], 2, axis=(-2, -1)))
        best = max(best, float(np.max(dist / d)))
    return best


class ConjugacyField(Field):
    """Transfer map built from holonomies and one fixed-point value.

    Use :func:`build_conjugacy` to construct.
    """

    def __init__(self, a: CocycleSystem, b: CocycleSystem, p0: PeriodicOrbit, c_p, window: int):
        self.a, self.b = a, b
        self.p0 = p0
        self.p = _fixed_point(p0)
        self.symbol = p0.word[0]
        self.c_p = np.asarray(c_p, dtype=float)
        self.window = window
        self.cache: dict[SftPoint, np.ndarray] = {}
        self._extra: dict[SftPoint, np.ndarray] = {}
        self.holder: HolderStats | None = None
        self.su_residual = 0.0
        self.condition_b: ConditionBReport | None = None
        self.certificates: dict = {}
        self.verified = False
        self.label = f"C[{a.label}<-{b.label}]"

    def formula(self, x: SftPoint) -> np.ndarray:
        """``H^{A,s}_{p,x} C_p H^{B,s}_{x,p}``."""
        return stable_holonomy(self.a, self.p, x).matrix @ self.c_p @ stable_holonomy(self.b, x, self.p).matrix

    def formula_unstable(self, x: SftPoint) -> np.ndarray:
        return unstable_holonomy(self.a, self.p, x).matrix @ self.c_p @ unstable_holonomy(self.b, x, self.p).matrix

    def value(self, h: SftPoint) -> np.ndarray:
        """Exact value at a homoclinic point of the base fixed point."""
        got = self.cache.get(h)
        if got is None:
            got = self._extra.get(h)
            if got is None:
                got = self.formula(h)
                self._extra[h] = got
        return got

    @property
    def rate(self) -> float:
        return self.holder.estimate if self.holder is not None else math.inf

    def evaluate(self, x: SftPoint, n: int) -> tuple[np.ndarray, float]:
        if n < 1:
            raise ValueError("evaluation window must be >= 1")
        h = homoclinic_surrogate(self.a.ts, self.symbol, x, n)
        radius = 0.0 if h == x else self.rate * self.a.metric.alpha ** (self.a.metric.beta * (n + 1))
        return self.value(h), radius

    def to_json(self) -> dict:
        pts = sorted(self.cache, key=SftPoint.sort_key)
        return {
            "p0": self.p0.to_json(),
            "C_p": self.c_p.tolist(),
            "window": self.window,
            "verified": self.verified,
            "su_residual": self.su_residual,
            "holder": None if self.holder is None else self.holder.to_json(),
            "cache": [{"point": x.to_json(), "matrix": self.cache[x].tolist()} for x in pts],
        }


def build_conjugacy(a: CocycleSystem, b: CocycleSystem, p0: PeriodicOrbit, c_p, window: int,
                    check: bool = True, cert_a: BunchingCertificate | None = None,
                    cert_b: BunchingCertificate | None = None, tol_scale: float = 1.0,
                    holder: bool = True) -> ConjugacyField:
    """Cache the transfer map on all homoclinic points with core length ``<= window``.

    With ``check`` the construction first requires condition (a), the cycle
    functional condition, and bunching certificates for both cocycles; with
    ``check=False`` the field is built regardless and marked unverified.
    """
    if a.d != b.d:
        raise DimensionMismatch(f"dimensions {a.d} and {b.d}")
    cf = ConjugacyField(a, b, p0, c_p, window)
    if check:
        cond = check_condition_b(a, b, p0, c_p, window, tol_scale)
        cf.condition_b = cond
        if not cond.passed:
            raise ConditionBFailed(f"cycle functionals differ by {cond.residual:.3e} at {cond.worst_point}")
        for name, cs, cert in (("A", a, cert_a), ("B", b, cert_b)):
            cert = cert if cert is not None else certify_direct(cs)
            if cert.verdict is not Verdict.BUNCHED:
                raise UnbunchedInput(f"cocycle {name} is not certified fiber bunched ({cert.verdict.value})")
            cf.certificates[name] = cert
    pts = homoclinic_points(a.ts, p0, window)
    su = 0.0
    for x in pts:
        cs_val = cf.formula(x)
        cf.cache[x] = cs_val
        su = max(su, opnorm(cs_val - cf.formula_unstable(x)))
    cf.su_residual = su
    if holder:
        mats = np.array([cf.cache[x] for x in pts])
        met = a.metric
        est = holder_estimate(pts, mats, met.alpha, met.beta, window)
        small = None
        stable = True
        if window >= 3:
            keep = [i for i, x in enumerate(pts) if x.start >= -(window - 2) and x.end <= window - 2]
            sub = [pts[i] for i in keep]
            small = holder_estimate(sub, mats[keep], met.alpha, met.beta, window)
            stable = abs(est - small) <= HOLDER_DRIFT * max(est, 1e-300) or est == small
        mp = max(float(np.max(np.linalg.norm(mats, 2, axis=(-2, -1)))),
                 float(np.max(np.linalg.norm(np.linalg.inv(mats), 2, axis=(-2, -1)))))
        cf.holder = HolderStats(est, small, stable, mp)
    scale = max(1.0, max(opnorm(m) for m in cf.cache.values()))
    cf.verified = check and su <= TOL_PCF * tol_scale * scale
    return cf


# --------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class CohomologyReport:
    max_residual: float
    slack: float
    tolerance: float
    per_step: tuple[float, ...]
    samples: int
    step: int

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance + self.slack

    def to_json(self) -> dict:
        return {"pass": self.passed, "max_residual": self.max_residual, "slack": self.slack,
                "tolerance": self.tolerance, "per_step": list(self.per_step),
                "samples": self.samples, "step": self.step}


def verify_cohomology(a: CocycleSystem, b: CocycleSystem, cf: Field, samples: Sequence[SftPoint],
                      depth: int = 12, n: int = 12, step: int = 1, tol: float = TOL_COHOMOLOGY,
                      tol_scale: float = 1.0) -> CohomologyReport:
    """Largest ``||A^j_x - C(shift^j x) B^j_x C(x)^-1||`` over samples and ``j = step, ..., depth*step``.

    Field values are taken at resolution ``n`` for each point separately.
    When the field is verified, the evaluation radii widen the acceptance
    threshold to first order.
    """
    per = np.zeros(depth)
    slack = 0.0
    top = 1.0
    for x in samples:
        c0, r0 = cf.evaluate(x, n)
        c0i = inverse(c0)
        for j in range(1, depth + 1):
            k = j * step
            ak = evaluate(a, x, k)
            bk = evaluate(b, x, k)
            c1, r1 = cf.evaluate(shift(x, k), n)
            res = opnorm(ak - c1 @ bk @ c0i)
            per[j - 1] = max(per[j - 1], res)
            top = max(top, opnorm(ak))
            if cf.verified and (r0 or r1):
                s = r1 * opnorm(bk) * opnorm(c0i) + opnorm(c1 @ bk) * opnorm(c0i) ** 2 * r0
                slack = max(slack, s)
    return CohomologyReport(float(per.max(initial=0.0)), slack, tol * tol_scale * top,
                            tuple(float(v) for v in per), len(samples), step)


@dataclass(frozen=True)
class ClosingReport:
    n_values: tuple[int, ...]
    norms: tuple[float, ...]
    slope: float
    theta: float | None
    threshold: float | None
    at_floor: bool
    plateau: bool
    orbit_checks: tuple[dict, ...] = ()

    @property
    def passed(self) -> bool:
        if self.at_floor:
            return True
        return self.threshold is not None and self.slope <= self.threshold

    def to_json(self) -> dict:
        return {"pass": self.passed, "n": list(self.n_values), "norm_R": list(self.norms),
                "slope": self.slope, "theta": self.theta, "threshold": self.threshold,
                "at_floor": self.at_floor, "plateau": self.plateau,
                "fitted_rate": math.exp(self.slope), "orbit_checks": list(self.orbit_checks)}


def closing_residual(a: CocycleSystem, b: CocycleSystem, c_p, x: SftPoint, n: int) -> np.ndarray:
    """``Bt^n_{s^-n x} (A^n_{s^-n x})^-1 (A^n_x)^-1 Bt^n_x - I`` with ``Bt = C_p B C_p^-1``."""
    c_p = np.asarray(c_p, dtype=float)
    ci = inverse(c_p)
    xm = shift(x, -n)
    bt_m = c_p @ evaluate(b, xm, n) @ ci
    bt_x = c_p @ evaluate(b, x, n) @ ci
    return bt_m @ inverse(evaluate(a, xm, n)) @ inverse(evaluate(a, x, n)) @ bt_x - np.eye(a.d)


def verify_pcf_closing_convergence(a: CocycleSystem, b: CocycleSystem, c_p, x: SftPoint,
                                   n_range: Iterable[int] = range(3, 13), theta: float | None = None,
                                   orbit_source: Callable | Mapping | None = None,
                                   p0: PeriodicOrbit | None = None, factor: float = 0.9,
                                   plateau_level: float = 1e-4) -> ClosingReport:
    """Decay of the closing residual ``R^n`` along ``n``.

    Passes when every ``||R^n||`` is at the rounding floor or when the affine
    fit of ``log ||R^n||`` has slope at most ``factor * log(theta)``. When an
    orbit source is given, each closing orbit's conjugator is checked against
    its return maps and compared with ``C_p``.
    """
    ns = list(n_range)
    norms = [opnorm(closing_residual(a, b, c_p, x, n)) for n in ns]
    logs = np.log(np.maximum(norms, LOG_FLOOR))
    at_floor = bool(np.all(np.asarray(norms) <= LOG_FLOOR))
    slope = float(np.polyfit(ns, logs, 1)[0]) if len(ns) > 1 else 0.0
    tail = norms[len(norms) // 2:]
    plateau = bool(min(tail) > plateau_level) if tail else False
    threshold = factor * math.log(theta) if theta is not None else None
    checks = []
    if orbit_source is not None:
        get = orbit_source.get if isinstance(orbit_source, Mapping) else orbit_source
        for n in ns:
            orb = closing_orbit(x, n, a.ts)
            c_q = get(orb)
            if c_q is None:
                raise MissingOrbitData(f"no conjugator for closing orbit {orb}")
            q = closing_point(x, n)
            aq, bq = evaluate(a, q, orb.period), evaluate(b, q, orb.period)
            # the source is indexed by orbits at their canonical point; move to q
            off = _rotation_offset(orb, q)
            c_at_q = evaluate(a, orb.point(), off) @ np.asarray(c_q) @ inverse(evaluate(b, orb.point(), off))
            checks.append({"n": n, "orbit": orb.to_json(),
                           "conjugacy_residual": opnorm(aq @ c_at_q - c_at_q @ bq),
                           "distance_to_C_p": opnorm(c_at_q - np.asarray(c_p))})
    return ClosingReport(tuple(ns), tuple(float(v) for v in norms), slope, theta, threshold,
                         at_floor, plateau, tuple(checks))


def _rotation_offset(orb: PeriodicOrbit, q: SftPoint) -> int:
    for j in range(orb.period):
        if orb.point(j) == q:
            return j
    raise ValueError(f"{q} is not on {orb}")


# --------------------------------------------------------------------------
# coprime powers


def bezout(a: int, b: int) -> tuple[int, int, int]:
    """``(g, r, s)`` with ``a r + b s = g = gcd(a, b)``."""
    r0, r1, s0, s1 = 1, 0, 0, 1
    x, y = a, b
    while y:
        q = x // y
        x, y = y, x - q * y
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    return x, r0, s0


@dataclass(frozen=True)
class CombineReport:
    n1: int
    n2: int
    r: int
    s: int
    step1: CohomologyReport
    membership: CohomologyReport

    @property
    def passed(self) -> bool:
        return self.step1.passed and self.membership.passed

    def to_json(self) -> dict:
        return {"N1": self.n1, "N2": self.n2, "bezout": [self.r, self.s], "pass": self.passed,
                "step1": self.step1.to_json(), "quotient_membership": self.membership.to_json()}


def combine_relprime(c1: Field, n1: int, c2: Field, n2: int, a: CocycleSystem, b: CocycleSystem,
                     samples: Sequence[SftPoint], depth: int = 6, n: int = 12,
                     raise_on_fail: bool = True) -> CombineReport:
    """Recover a step-one transfer map from transfer maps of coprime powers.

    ``c1`` and ``c2`` are fields on base points (wrap block fields with
    :class:`PowerView`). The second field is checked directly against the
    step-one equation, and the quotient ``c1 c2^-1`` is checked to commute
    with ``A^(N1 N2)``.
    """
    from .centralizer import centralizer_membership

    g, r, s = bezout(n1, n2)
    if g != 1:
        raise NotCoprime(f"gcd({n1}, {n2}) = {g}")
    step1 = verify_cohomology(a, b, c2, samples, depth=depth, n=n, step=1)
    member = centralizer_membership(a, ProductField(c1, c2), samples, depth=depth, n=n, step=n1 * n2)
    rep = CombineReport(n1, n2, r, s, step1, member)
    if raise_on_fail and not step1.passed:
        raise ResidualFail(f"step-one residual {step1.max_residual:.3e} exceeds {step1.tolerance:.3e}")
    return rep
