"""Fiber-bunching certificates.

Two independent routes decide whether a cocycle's non-conformality is
dominated by the base contraction ``alpha**beta``:

* the direct route computes the exact maximum over all admissible contexts of
  ``a_N = log(||A^N|| ||A^-N||) + N beta log(alpha)`` by a pruned word sweep;
* the periodic route evaluates the same quantity asymptotically on periodic
  orbits, where it reduces to a ratio of extreme eigenvalue moduli.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np

from .cocycle import CocycleSystem, evaluate, product_along_cyclic_word, word_product
from .errors import BadContext, CombinatorialBlowup
from .numerics import eigen_moduli
from .sft import (DEFAULT_MAX_PERIOD, Metric, PeriodicOrbit, SftPoint,
                  enumerate_periodic_orbits, format_word)

ETA_MARGIN = 1e-9
DEFAULT_BUDGET = 2_000_000


class Verdict(str, Enum):
    BUNCHED = "BUNCHED"
    NOT_BUNCHED = "NOT_BUNCHED"
    UNDECIDED = "UNDECIDED"


class Route(str, Enum):
    DIRECT = "DIRECT"
    PERIODIC = "PERIODIC"


@dataclass(frozen=True)
class BunchingCertificate:
    """Outcome of a bunching check.

    ``theta`` and ``L`` satisfy ``K(A^n_x) alpha^(n beta) <= L theta^n`` for all
    ``x, n`` when the verdict is BUNCHED via the direct route.
    """

    verdict: Verdict
    route: Route
    N: int | None = None
    theta: float | None = None
    L: float | None = None
    eta: float | None = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def bunched(self) -> bool:
        return self.verdict is Verdict.BUNCHED

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "route": self.route.value,
            "N": self.N,
            "theta": self.theta,
            "L": self.L,
            "eta": self.eta,
            "diagnostics": self.diagnostics,
        }


def _log_distortion(m: np.ndarray) -> float:
    s = np.linalg.svd(m, compute_uv=False)
    return math.log(s[0] / s[-1])


def distortion(cs: CocycleSystem, x: SftPoint, n: int) -> float:
    """``||A^n_x|| ||(A^n_x)^-1||``."""
    s = np.linalg.svd(evaluate(cs, x, n), compute_uv=False)
    return float(s[0] / s[-1])


def subadditive_value(cs: CocycleSystem, w: Sequence[int], n: int) -> float:
    """``log K`` of the ``n``-step product fixed by the context ``w`` plus ``n beta log alpha``."""
    m = cs.radius
    if len(w) != n + 2 * m:
        raise BadContext(f"context for n = {n} needs length {n + 2 * m}, got {len(w)}")
    if not cs.ts.is_admissible(w):
        raise BadContext(f"context {format_word(w)} is not admissible")
    return _log_distortion(word_product(cs, w)) + n * cs.metric.beta * math.log(cs.metric.alpha)


class _Sweep:
    """Branch-and-bound maximum of ``a_N`` over contexts of length ``N + 2m``."""

    def __init__(self, cs: CocycleSystem, budget: int):
        self.cs = cs
        self.budget = budget
        self.nodes = 0
        gen = cs.gen
        self.mats = gen.mats
        self.kmax = max(_log_distortion(a) for a in gen.mats)
        self.drift = cs.metric.beta * math.log(cs.metric.alpha)

    def run(self, n: int):
        """Return ``(max a_n, worst context, per-r upper bounds of log K(A^r))``.

        Stops early with the first nonnegative leaf, in which case the maximum
        is that leaf's value.
        """
        cs, gen = self.cs, self.cs.gen
        m = gen.radius
        length = n + 2 * m
        best = -math.inf
        worst: tuple = ()
        rmax = np.full(n, -math.inf)
        rmax[0] = 0.0
        width = 2 * m + 1
        target = n * self.drift
        stack: list[tuple[tuple, np.ndarray]] = [((a,), np.eye(gen.d)) for a in reversed(range(cs.ts.k))]
        while stack:
            word, prod = stack.pop()
            self.nodes += 1
            if self.nodes > self.budget:
                raise CombinatorialBlowup(f"word sweep exceeded the budget of {self.budget} nodes at N = {n}")
            if len(word) >= width:
                prod = self.mats[gen.index_of(word[-width:])] @ prod
            j = max(0, len(word) - 2 * m)
            lk = _log_distortion(prod) if j else 0.0
            if len(word) == length:
                val = lk + target
                if val > best:
                    best, worst = val, word
                if val >= 0:
                    return best, worst, rmax, False
                continue
            if j < n:
                rmax[j] = max(rmax[j], lk)
            ub = lk + (n - j) * self.kmax + target
            if ub <= best:
                for r in range(j + 1, n):
                    rmax[r] = max(rmax[r], lk + (r - j) * self.kmax)
                continue
            for b in reversed(cs.ts.successors(word[-1])):
                stack.append((word + (b,), prod))
        return best, worst, rmax, True


def certify_direct(cs: CocycleSystem, max_N: int = 24, budget: int = DEFAULT_BUDGET,
                   max_period: int = DEFAULT_MAX_PERIOD) -> BunchingCertificate:
    """Search ``N = 1..max_N`` for a negative exact maximum of ``a_N``.

    On failure the periodic route decides between NOT_BUNCHED (a violating
    orbit exists) and UNDECIDED.
    """
    if max_N < 1:
        raise ValueError("max_N must be >= 1")
    sweep = _Sweep(cs, budget)
    history = []
    for n in range(1, max_N + 1):
        best, worst, rmax, complete = sweep.run(n)
        history.append({"N": n, "max_a": best, "complete": complete})
        if complete and best < 0:
            theta = math.exp(best / n)
            r = np.arange(n)
            lv = rmax + r * sweep.drift - r * math.log(theta)
            big_l = float(max(1.0, math.exp(float(np.max(lv)))))
            return BunchingCertificate(
                Verdict.BUNCHED, Route.DIRECT, N=n, theta=theta, L=big_l,
                diagnostics={"max_a": best, "worst_context": format_word(worst),
                             "nodes": sweep.nodes})
    periodic = certify_periodic(cs, enumerate_periodic_orbits(cs.ts, max_period))
    diag = {"history": history[-3:], "nodes": sweep.nodes,
            "periodic_verdict": periodic.verdict.value}
    if periodic.verdict is Verdict.NOT_BUNCHED:
        diag["witness"] = periodic.diagnostics["worst_orbit"]
        diag["witness_q"] = periodic.eta
        return BunchingCertificate(Verdict.NOT_BUNCHED, Route.DIRECT, N=max_N, eta=periodic.eta,
                                   diagnostics=diag)
    return BunchingCertificate(Verdict.UNDECIDED, Route.DIRECT, N=max_N, diagnostics=diag)


def orbit_quantity(ret: np.ndarray, period: int, metric: Metric) -> float:
    """``(1/k) log(|lambda_max| / |lambda_min|) + beta log alpha`` for a return map."""
    mod = eigen_moduli(ret)
    return math.log(mod[0] / mod[-1]) / period + metric.beta * math.log(metric.alpha)


def certify_periodic(source, orbits: Iterable[PeriodicOrbit], metric: Metric | None = None,
                     margin: float = ETA_MARGIN) -> BunchingCertificate:
    """Bunching evidence from periodic orbits.

    Parameters
    ----------
    source : CocycleSystem or callable
        Either a cocycle or a function returning the return map of an orbit.
    orbits : iterable of PeriodicOrbit
    metric : Metric, optional
        Required when ``source`` is not a CocycleSystem.
    margin : float
        Values in ``[-margin, 0)`` are too close to call.
    """
    orbits = list(orbits)
    if not orbits:
        raise ValueError("certify_periodic needs at least one orbit")
    if isinstance(source, CocycleSystem):
        metric = source.metric
        ret_of: Callable = lambda p: product_along_cyclic_word(source, p)
    else:
        if metric is None:
            raise ValueError("a metric is required with a return-map source")
        ret_of = source
    qs = [(orbit_quantity(ret_of(p), p.period, metric), p) for p in orbits]
    eta, worst = max(qs, key=lambda t: t[0])
    diag = {
        "worst_orbit": worst.to_json(),
        "orbits_checked": len(qs),
        "max_period": max(p.period for p in orbits),
        "q": {p.to_json(): q for q, p in qs},
        "scope": "evidence over finitely many orbits",
    }
    if eta >= 0:
        verdict = Verdict.NOT_BUNCHED
    elif eta < -margin:
        verdict = Verdict.BUNCHED
    else:
        verdict = Verdict.UNDECIDED
    return BunchingCertificate(verdict, Route.PERIODIC, eta=eta, diagnostics=diag)


def certify(cs: CocycleSystem, max_N: int = 24, max_period: int = DEFAULT_MAX_PERIOD,
            route: str = "both", budget: int = DEFAULT_BUDGET) -> dict:
    """Run one or both routes and flag contradictions."""
    out = {}
    if route in ("both", "direct"):
        out["direct"] = certify_direct(cs, max_N, budget, max_period)
    if route in ("both", "periodic"):
        out["periodic"] = certify_periodic(cs, enumerate_periodic_orbits(cs.ts, max_period))
    verdicts = {c.verdict for c in out.values()}
    out["contradiction"] = {Verdict.BUNCHED, Verdict.NOT_BUNCHED} <= verdicts
    return out


def require_bunched(cs: CocycleSystem, cert: BunchingCertificate | None = None,
                    max_N: int = 24) -> BunchingCertificate:
    """Return a direct BUNCHED certificate or raise UnbunchedInput."""
    from .errors import UnbunchedInput

    if cert is None:
        cert = certify_direct(cs, max_N)
    if cert.verdict is not Verdict.BUNCHED or cert.theta is None:
        raise UnbunchedInput(f"{cs.label or 'cocycle'} is not certified fiber bunched ({cert.verdict.value})")
    return cert


def power_certificate(cert: BunchingCertificate, n: int) -> BunchingCertificate:
    """Certificate for ``A^n`` over the block shift with metric ``alpha**n``.

    From ``K(A^k) alpha^(k beta) <= L theta^k`` at ``k = n j`` the power
    cocycle satisfies the same bound with ``theta**n`` and the same ``L``.
    """
    if cert.verdict is not Verdict.BUNCHED or cert.theta is None:
        raise ValueError("only a direct BUNCHED certificate can be raised to a power")
    diag = {"derived_from": {"N": cert.N, "theta": cert.theta}, "power": n}
    return BunchingCertificate(Verdict.BUNCHED, cert.route, N=-(-cert.N // n), theta=cert.theta ** n,
                               L=cert.L, diagnostics=diag)
