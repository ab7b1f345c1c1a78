"""Extreme Lyapunov exponents at periodic orbits and for Markov measures."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cocycle import CocycleSystem, product_along_cyclic_word
from .errors import BadWeights
from .numerics import eigen_moduli
from .sft import PeriodicOrbit, TransitionStructure, enumerate_periodic_orbits


def periodic_exponents(cs: CocycleSystem, p: PeriodicOrbit) -> tuple[float, float]:
    """``(1/k) log`` of the largest and smallest eigenvalue moduli of the return map."""
    mod = eigen_moduli(product_along_cyclic_word(cs, p))
    return math.log(mod[0]) / p.period, math.log(mod[-1]) / p.period


class MarkovSampler:
    """Stationary Markov chain on the symbols of a shift of finite type.

    Parameters
    ----------
    ts : TransitionStructure
    weights : array_like, optional
        Nonnegative ``k x k`` weights, positive exactly where transitions are
        allowed. Rows are normalized. By default the maximal-entropy chain is
        used: ``P[i, j] = Q[i, j] r[j] / (lambda r[i])`` for the Perron pair
        ``(lambda, r)`` of ``Q``.
    seed : int
    """

    def __init__(self, ts: TransitionStructure, weights=None, seed: int = 0):
        self.ts = ts
        self.seed = seed
        q = ts.matrix.astype(float)
        if weights is None:
            vals, vecs = np.linalg.eig(q)
            i = int(np.argmax(vals.real))
            lam = float(vals[i].real)
            r = np.abs(vecs[:, i].real)
            p = q * r[None, :] / (lam * r[:, None])
        else:
            w = np.asarray(weights, dtype=float)
            if w.shape != q.shape:
                raise BadWeights(f"weights have shape {w.shape}, expected {q.shape}")
            if np.any(w < 0) or not np.all(np.isfinite(w)):
                raise BadWeights("weights must be finite and nonnegative")
            if np.any((w > 0) != (q > 0)):
                raise BadWeights("weights must be positive exactly on allowed transitions")
            p = w / w.sum(axis=1, keepdims=True)
        self.P = p / p.sum(axis=1, keepdims=True)
        vals, vecs = np.linalg.eig(self.P.T)
        i = int(np.argmin(np.abs(vals - 1.0)))
        pi = np.abs(vecs[:, i].real)
        self.pi = pi / pi.sum()
        self._cum = np.cumsum(self.P, axis=1)

    def paths(self, n_paths: int, length: int, rng: np.random.Generator | None = None) -> np.ndarray:
        """Array of shape ``(n_paths, length)`` of stationary sample paths."""
        rng = np.random.default_rng(self.seed) if rng is None else rng
        out = np.empty((n_paths, length), dtype=np.int64)
        cur = rng.choice(self.ts.k, size=n_paths, p=self.pi)
        out[:, 0] = cur
        u = rng.random((n_paths, length - 1))
        for t in range(1, length):
            cur = (u[:, t - 1][:, None] > self._cum[cur]).sum(axis=1)
            cur = np.minimum(cur, self.ts.k - 1)
            out[:, t] = cur
        return out


def markov_sampler(ts: TransitionStructure, weights=None, seed: int = 0) -> MarkovSampler:
    return MarkovSampler(ts, weights, seed)


@dataclass(frozen=True)
class MeasureEstimate:
    lam_plus: float
    lam_minus: float
    n_steps: int
    n_samples: int
    se_plus: float
    se_minus: float

    def to_json(self) -> dict:
        return {"lambda_plus": self.lam_plus, "lambda_minus": self.lam_minus, "n_steps": self.n_steps,
                "n_samples": self.n_samples, "std_error_plus": self.se_plus,
                "std_error_minus": self.se_minus}


def measure_exponents(cs: CocycleSystem, sampler: MarkovSampler, n_steps: int = 5000,
                      n_samples: int = 64) -> MeasureEstimate:
    """Estimate the extreme exponents along sampled orbits.

    Each sample pushes an orthonormal frame through the cocycle and
    re-orthonormalizes by QR at every step; the logs of the diagonal of ``R``
    accumulate the exponents, which avoids overflow for any product length.
    """
    if n_steps < 100:
        raise ValueError("n_steps must be >= 100")
    gen = cs.gen
    m = gen.radius
    rng = np.random.default_rng(sampler.seed)
    paths = sampler.paths(n_samples, n_steps + 2 * m, rng)
    idx = gen.indices(paths)
    d = gen.d
    q = np.broadcast_to(np.eye(d), (n_samples, d, d)).copy()
    acc = np.zeros((n_samples, d))
    for j in range(n_steps):
        q, r = np.linalg.qr(np.matmul(gen.mats[idx[:, j]], q))
        acc += np.log(np.abs(np.diagonal(r, axis1=1, axis2=2)))
    rates = acc / n_steps
    top, bot = rates.max(axis=1), rates.min(axis=1)
    se = lambda v: float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
    return MeasureEstimate(float(top.mean()), float(bot.mean()), n_steps, n_samples, se(top), se(bot))


@dataclass(frozen=True)
class GapReport:
    periods: tuple[int, ...]
    gaps: tuple[float, ...]
    best_orbits: tuple[str, ...]
    estimate: MeasureEstimate

    def to_json(self) -> dict:
        return {"estimate": self.estimate.to_json(),
                "curve": [{"max_period": p, "gap": g, "best_orbit": o}
                          for p, g, o in zip(self.periods, self.gaps, self.best_orbits)]}


def approximation_gap(cs: CocycleSystem, max_period: int = 10, sampler: MarkovSampler | None = None,
                      n_steps: int = 2000, n_samples: int = 32,
                      estimate: MeasureEstimate | None = None) -> GapReport:
    """Distance from the measure exponents to the closest periodic exponents.

    The gap is a running minimum over orbits of growing period, so the curve
    is nonincreasing by construction.
    """
    if estimate is None:
        sampler = sampler if sampler is not None else MarkovSampler(cs.ts)
        estimate = measure_exponents(cs, sampler, n_steps, n_samples)
    orbits = enumerate_periodic_orbits(cs.ts, max_period)
    best, best_orbit = math.inf, ""
    periods, gaps, names = [], [], []
    for period in range(1, max_period + 1):
        for p in orbits:
            if p.period != period:
                continue
            lp, lm = periodic_exponents(cs, p)
            g = abs(estimate.lam_plus - lp) + abs(estimate.lam_minus - lm)
            if g < best:
                best, best_orbit = g, p.to_json()
        periods.append(period)
        gaps.append(best)
        names.append(best_orbit)
    return GapReport(tuple(periods), tuple(gaps), tuple(names), estimate)


@dataclass(frozen=True)
class SpectrumReport:
    periodic: tuple[tuple[str, float, float], ...]
    estimate: MeasureEstimate | None
    markov: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"periodic": [{"orbit": o, "lambda_plus": lp, "lambda_minus": lm}
                             for o, lp, lm in self.periodic],
                "measure_estimate": None if self.estimate is None else self.estimate.to_json(),
                "markov": self.markov}


def spectrum_report(cs: CocycleSystem, max_period: int = 10, sampler: MarkovSampler | None = None,
                    n_steps: int = 5000, n_samples: int = 64) -> SpectrumReport:
    sampler = sampler if sampler is not None else MarkovSampler(cs.ts)
    per = tuple((p.to_json(), *periodic_exponents(cs, p)) for p in enumerate_periodic_orbits(cs.ts, max_period))
    est = measure_exponents(cs, sampler, n_steps, n_samples)
    return SpectrumReport(per, est, sampler.P.tolist())
