"""Invariant splittings of perturbed constant cocycles and blockwise transfer maps.

A constant matrix splits ``R^d`` into sums of generalized eigenspaces grouped
by eigenvalue modulus. A small perturbation ``B`` keeps a continuous invariant
splitting: the sum of the clusters at or above a modulus is pushed forward
along the past of ``x``, the sum at or below is pulled back along the future,
and the cluster space at ``x`` is the intersection of the two.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .bunching import BunchingCertificate, certify_periodic
from .cocycle import CocycleSystem, Generator
from .conjugacy import ConjugacyField, Field, build_conjugacy
from .errors import BlockMissing, NoGapWarning, NotConverged
from .numerics import Subspace, canonical_frame, inverse, matdist, opnorm, subspace_angle, subspace_intersect
from .sft import (Metric, PeriodicOrbit, SftPoint, TransitionStructure, admissible_words, connector,
                  homoclinic_points, homoclinic_surrogate, shift, symbol_array)

GAP_TOL = 1e-6
TOL_SPLIT = 1e-9
DELTA_MAX = 0.05


@dataclass(frozen=True, eq=False)
class Cluster:
    modulus: float
    multiplicity: int
    space: Subspace

    def to_json(self) -> dict:
        return {"modulus": self.modulus, "multiplicity": self.multiplicity,
                "basis": self.space.basis.tolist()}


@dataclass(frozen=True, eq=False)
class ClusterSet:
    """Clusters of a constant matrix in increasing modulus."""

    matrix: np.ndarray
    clusters: tuple[Cluster, ...]

    @property
    def l(self) -> int:
        return len(self.clusters)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    @property
    def reference(self) -> np.ndarray:
        """Columns: the cluster bases side by side."""
        return np.concatenate([c.space.basis for c in self.clusters], axis=1)

    def fast(self, i: int) -> Subspace:
        """Sum of clusters ``i, ..., l - 1``."""
        return Subspace.from_vectors(np.concatenate([c.space.basis for c in self.clusters[i:]], axis=1))

    def slow(self, i: int) -> Subspace:
        """Sum of clusters ``0, ..., i``."""
        return Subspace.from_vectors(np.concatenate([c.space.basis for c in self.clusters[:i + 1]], axis=1))

    def gaps(self) -> list[float]:
        m = [c.modulus for c in self.clusters]
        return [b / a for a, b in zip(m, m[1:])]

    def to_json(self) -> dict:
        return {"matrix": self.matrix.tolist(), "clusters": [c.to_json() for c in self.clusters],
                "gaps": self.gaps()}


def _schur_space(a: np.ndarray, select) -> np.ndarray:
    t, z, sdim = scipy.linalg.schur(a, output="real", sort=select)
    return z[:, :sdim]


def cluster_constant(a, gap_tol: float = GAP_TOL) -> ClusterSet:
    """Group eigenvalues by modulus and compute each cluster's invariant subspace.

    Moduli whose ratio exceeds ``1 + gap_tol`` start a new cluster. Each
    cluster space is the intersection of the invariant subspaces for moduli
    ``>= rho`` and ``<= rho`` taken from sorted real Schur forms.
    """
    a = np.asarray(a, dtype=float)
    inverse(a)
    mods = np.sort(np.abs(np.linalg.eigvals(a)))
    groups: list[list[float]] = [[mods[0]]]
    for v in mods[1:]:
        if v > groups[-1][-1] * (1.0 + gap_tol):
            groups.append([v])
        else:
            groups[-1].append(v)
    if len(groups) == 1:
        warnings.warn("all eigenvalue moduli fall in one cluster", NoGapWarning, stacklevel=2)
    d = a.shape[0]
    clusters = []
    for g in groups:
        lo, hi = g[0], g[-1]
        cut_lo, cut_hi = lo / (1.0 + gap_tol / 2), hi * (1.0 + gap_tol / 2)
        up = _schur_space(a, lambda re, im: math.hypot(re, im) >= cut_lo)
        down = _schur_space(a, lambda re, im: math.hypot(re, im) <= cut_hi)
        if up.shape[1] == d:
            space = Subspace(down)
        elif down.shape[1] == d:
            space = Subspace(up)
        else:
            space = subspace_intersect(Subspace(up), Subspace(down))
        if space.rank != len(g):
            raise NotConverged(f"cluster at modulus {lo:.6g} has rank {space.rank}, expected {len(g)}")
        clusters.append(Cluster(float(np.mean(g)), len(g), Subspace(canonical_frame(space.basis))))
    return ClusterSet(a, tuple(clusters))


def _push(gen: Generator, idx: np.ndarray, basis: np.ndarray, inverse_maps: bool) -> np.ndarray:
    """Push a batch of frames through a sequence of factors, re-orthonormalizing."""
    mats = gen.inv_mats if inverse_maps else gen.mats
    p = idx.shape[0]
    v = np.broadcast_to(basis, (p,) + basis.shape).copy()
    for j in range(idx.shape[1]):
        v, _ = np.linalg.qr(np.matmul(mats[idx[:, j]], v))
    return v


def _reference_frame(space: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Orthonormal frame of ``span(space)`` closest to the reference frame ``ref``."""
    m = space.T @ ref
    u, _, vt = np.linalg.svd(m)
    return space @ (u @ vt)


def split_points(b: CocycleSystem, clusters: ClusterSet, points: Sequence[SftPoint],
                 iterations: int = 60) -> list[list[np.ndarray]]:
    """Frames of every cluster space of ``b`` at each point.

    The frame of cluster ``i`` is the orthonormal basis of the cluster space
    closest to the reference basis of the unperturbed cluster, which keeps the
    gauge continuous in the point.
    """
    gen = b.gen
    m = gen.radius
    t = iterations
    syms = symbol_array(points, -t - m, t - 1 + m)
    idx = gen.indices(syms)  # factor positions -t .. t-1
    past = idx[:, :t]
    future = idx[:, t:][:, ::-1]
    l = clusters.l
    fast = [None] + [_push(gen, past, clusters.fast(i).basis, False) for i in range(1, l)]
    slow = [_push(gen, future, clusters.slow(i).basis, True) for i in range(l - 1)] + [None]
    out = []
    for k in range(len(points)):
        frames = []
        for i, c in enumerate(clusters.clusters):
            if fast[i] is None and slow[i] is None:
                space = np.eye(clusters.d)
            elif fast[i] is None:
                space = slow[i][k]
            elif slow[i] is None:
                space = fast[i][k]
            else:
                space = subspace_intersect(Subspace(fast[i][k]), Subspace(slow[i][k])).basis
            if space.shape[1] != c.multiplicity:
                raise NotConverged(f"cluster {i} has rank {space.shape[1]} at {points[k]}")
            frames.append(_reference_frame(space, c.space.basis))
        out.append(frames)
    return out


def splitting_at(b: CocycleSystem, clusters: ClusterSet, x: SftPoint, iterations: int = 60) -> list[np.ndarray]:
    return split_points(b, clusters, [x], iterations)[0]


@dataclass(eq=False)
class SplittingReport:
    clusters: ClusterSet
    points: list
    frames: list
    invariance_residual: float
    truncation: float
    gaps: list
    delta: float
    holder_constant: float
    iterations: int
    depth: int
    convergence: list = field(default_factory=list)

    def subspace(self, k: int, i: int) -> Subspace:
        return Subspace(self.frames[k][i])

    @property
    def passed(self) -> bool:
        return self.invariance_residual < TOL_SPLIT + self.truncation

    def to_json(self) -> dict:
        return {
            "clusters": self.clusters.to_json(),
            "grid_points": len(self.points),
            "depth": self.depth,
            "iterations": self.iterations,
            "invariance_residual": self.invariance_residual,
            "truncation_estimate": self.truncation,
            "gaps": self.gaps,
            "perturbation_delta": self.delta,
            "within_delta_max": self.delta <= DELTA_MAX,
            "holder_constant": self.holder_constant,
            "convergence": self.convergence,
            "pass": self.passed,
        }


def perturbation_size(b: CocycleSystem, a: np.ndarray) -> float:
    """Largest ``matdist(B(w), A) / ||A||`` over the table."""
    return max(matdist(m, a) for m in b.gen.mats) / opnorm(a)


def compute_splitting(b: CocycleSystem, clusters: ClusterSet, depth: int = 8, iterations: int = 60,
                      symbol: int | None = None, conv_tol: float = 1e-10) -> SplittingReport:
    """Invariant splitting of ``b`` on the homoclinic grid of a fixed point.

    The grid holds every point homoclinic to ``symbol`` with core length at
    most ``depth``. Truncation is estimated by repeating the computation with
    half the iterations; NotConverged is raised if that difference exceeds
    ``conv_tol``.
    """
    ts = b.ts
    if symbol is None:
        symbol = ts.fixed_symbols()[0]
    grid = homoclinic_points(ts, PeriodicOrbit((symbol,)), depth)
    frames = split_points(b, clusters, grid, iterations)
    half = split_points(b, clusters, grid, max(1, iterations // 2))
    trunc = 0.0
    for f, g in zip(frames, half):
        for u, v in zip(f, g):
            trunc = max(trunc, subspace_angle(Subspace(u), Subspace(v)))
    convergence = [{"iterations": max(1, iterations // 2), "max_angle_to_final": trunc}]
    if trunc > conv_tol:
        raise NotConverged(f"splitting moved by {trunc:.3e} between {iterations // 2} and {iterations} iterations")
    shifted = split_points(b, clusters, [shift(x, 1) for x in grid], iterations)
    inv = 0.0
    for x, f, g in zip(grid, frames, shifted):
        bx = b.at(x)
        for u, v in zip(f, g):
            inv = max(inv, subspace_angle(Subspace.from_vectors(bx @ u), Subspace(v)))
    # Hoelder constant of the cluster fields across grid pairs
    projs = np.array([[u @ u.T for u in f] for f in frames])  # (P, l, d, d)
    span = depth
    syms = symbol_array(grid, -span - 1, span + 1).astype(np.int64)
    pos = np.abs(np.arange(-span - 1, span + 2))
    hc = 0.0
    for k in range(len(grid) - 1):
        diff = syms[k + 1:] != syms[k]
        r = np.where(diff, pos[None, :], np.iinfo(np.int64).max).min(axis=1)
        dist = np.power(b.metric.alpha, r.astype(float) * b.metric.beta)
        sines = np.linalg.norm(projs[k + 1:] - projs[k], 2, axis=(-2, -1)).max(axis=1)
        hc = max(hc, float(np.max(np.arcsin(np.minimum(sines, 1.0)) / dist)))
    return SplittingReport(clusters, grid, frames, inv, trunc, clusters.gaps(),
                           perturbation_size(b, clusters.matrix), hc, iterations, depth, convergence)


# --------------------------------------------------------------------------
# restricted blocks


@dataclass(eq=False)
class FramedBlock:
    index: int
    system: CocycleSystem
    clusters: ClusterSet
    iterations: int
    symbol: int

    def frame(self, b: CocycleSystem, x: SftPoint) -> np.ndarray:
        return splitting_at(b, self.clusters, x, self.iterations)[self.index]


def _word_surrogate(ts: TransitionStructure, symbol: int, word, radius: int) -> SftPoint:
    pre = connector(ts, symbol, word[0])
    post = connector(ts, word[-1], symbol)
    return SftPoint.homoclinic(symbol, pre + tuple(word) + post, -radius - len(pre))


def restrict_cocycle(b: CocycleSystem, report: SplittingReport, i: int, radius: int | None = None,
                     symbol: int | None = None) -> FramedBlock:
    """The action of ``b`` on cluster ``i`` in the stored frames, as a windowed cocycle.

    The value on a word ``w`` of length ``2 radius + 1`` is
    ``F(shift h)^T B_h F(h)`` where ``h`` is the homoclinic point carrying
    ``w`` on ``[-radius, radius]`` and ``F`` is the cluster frame.
    """
    ts = b.ts
    radius = b.radius + 2 if radius is None else radius
    if symbol is None:
        symbol = ts.fixed_symbols()[0]
    clusters = report.clusters
    words = admissible_words(ts, 2 * radius + 1)
    pts = [_word_surrogate(ts, symbol, w, radius) for w in words]
    f0 = split_points(b, clusters, pts, report.iterations)
    f1 = split_points(b, clusters, [shift(h, 1) for h in pts], report.iterations)
    table = {w: f1[k][i].T @ b.at(h) @ f0[k][i] for k, (w, h) in enumerate(zip(words, pts))}
    gen = Generator(ts, radius, table)
    cs = CocycleSystem(gen, b.metric, f"{b.label}|E{i}")
    return FramedBlock(i, cs, clusters, report.iterations, symbol)


def block_constant(clusters: ClusterSet, i: int) -> np.ndarray:
    """Action of the constant matrix on cluster ``i`` in its reference frame."""
    u = clusters.clusters[i].space.basis
    return u.T @ clusters.matrix @ u


class BlockwiseField(Field):
    """``C(x) = U_A diag(C_i(x)) U_B(x)^-1`` assembled from per-block transfer maps."""

    def __init__(self, clusters: ClusterSet, b: CocycleSystem, blocks: Sequence[FramedBlock],
                 fields: Sequence[ConjugacyField], iterations: int):
        self.clusters = clusters
        self.b = b
        self.blocks = list(blocks)
        self.fields = list(fields)
        self.iterations = iterations
        self.u_a = clusters.reference
        self.symbol = blocks[0].symbol
        self.verified = all(f.verified for f in fields)
        self.label = f"blockwise[{b.label}]"
        self._memo: dict[SftPoint, np.ndarray] = {}

    def value(self, h: SftPoint) -> np.ndarray:
        got = self._memo.get(h)
        if got is None:
            frames = splitting_at(self.b, self.clusters, h, self.iterations)
            u_b = np.concatenate(frames, axis=1)
            diag = scipy.linalg.block_diag(*[f.value(h) for f in self.fields])
            got = self.u_a @ diag @ inverse(u_b)
            self._memo[h] = got
        return got

    def evaluate(self, x, n):
        h = homoclinic_surrogate(self.b.ts, self.symbol, x, n)
        rate = sum(f.rate for f in self.fields)
        radius = 0.0 if h == x else rate * self.b.metric.alpha ** (self.b.metric.beta * (n + 1))
        return self.value(h), radius


@dataclass(eq=False)
class BlockAssembly:
    field: BlockwiseField
    blocks: list
    block_fields: list
    block_certificates: list

    def to_json(self) -> dict:
        return {
            "blocks": [{"index": blk.index, "dim": blk.system.d, "radius": blk.system.radius,
                        "verdict": cert.verdict.value, "eta": cert.eta,
                        "worst_orbit": cert.diagnostics.get("worst_orbit"),
                        "su_residual": f.su_residual, "verified": f.verified}
                       for blk, f, cert in zip(self.blocks, self.block_fields, self.block_certificates)],
            "verified": self.field.verified,
        }


def assemble_blockwise(clusters: ClusterSet, b: CocycleSystem, report: SplittingReport,
                       window: int = 6, block_cp: Sequence[np.ndarray] | None = None,
                       blocks: Sequence[FramedBlock] | None = None,
                       max_period: int = 8) -> BlockAssembly:
    """Conjugate each restricted block to the constant's block and take the direct sum.

    Each block pair is checked with the cycle-functional condition and built
    with :func:`build_conjugacy`; a block that cannot be built raises
    BlockMissing.
    """
    from .errors import CocylabError
    from .sft import enumerate_periodic_orbits

    l = clusters.l
    if blocks is None:
        blocks = [restrict_cocycle(b, report, i) for i in range(l)]
    if len(blocks) != l:
        raise BlockMissing(f"expected {l} blocks, got {len(blocks)}")
    p0 = PeriodicOrbit((blocks[0].symbol,))
    orbits = enumerate_periodic_orbits(b.ts, max_period)
    fields, certs = [], []
    for i, blk in enumerate(blocks):
        a_i = CocycleSystem(Generator.constant(b.ts, block_constant(clusters, i)), b.metric, f"A|E{i}")
        cert = certify_periodic(blk.system, orbits)
        certs.append(cert)
        if block_cp is not None:
            c_p = np.asarray(block_cp[i], dtype=float)
        else:
            from .conjugacy import solve_conjugator

            c_p, _ = solve_conjugator(a_i.at(p0.point()), blk.system.at(p0.point()))
            if c_p is None:
                raise BlockMissing(f"block {i} has no conjugator at the fixed point")
        try:
            f = build_conjugacy(a_i, blk.system, p0, c_p, window, check=True, holder=True)
        except CocylabError as exc:
            raise BlockMissing(f"block {i} could not be conjugated: {exc.code}: {exc}") from exc
        fields.append(f)
    return BlockAssembly(BlockwiseField(clusters, b, blocks, fields, report.iterations), list(blocks),
                         fields, certs)
