"""Small dense linear algebra: norms, inverses, commutants and subspaces."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankAmbiguous, RankMismatch, SingularMatrix

TOL_SING = 1e-10
GAP_FACTOR = 1e6
TOL_ANGLE = 1e-8


def opnorm(m) -> float:
    """Spectral norm (largest singular value)."""
    return float(np.linalg.norm(np.asarray(m, dtype=float), 2))


def inverse(m) -> np.ndarray:
    """Inverse with a conditioning check.

    Raises SingularMatrix when the smallest singular value is below
    ``TOL_SING`` times the largest.
    """
    m = np.asarray(m, dtype=float)
    s = np.linalg.svd(m, compute_uv=False)
    if not np.all(np.isfinite(s)) or s[-1] <= TOL_SING * s[0]:
        raise SingularMatrix(f"smallest singular value {s[-1]:.3e} vs largest {s[0]:.3e}")
    return np.linalg.inv(m)


def matdist(a, b) -> float:
    """``||A - B|| + ||A^-1 - B^-1||``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return opnorm(a - b) + opnorm(inverse(a) - inverse(b))


def distortion(m) -> float:
    """``||M|| ||M^-1||``, the ratio of extreme singular values."""
    s = np.linalg.svd(np.asarray(m, dtype=float), compute_uv=False)
    if s[-1] == 0.0:
        return np.inf
    return float(s[0] / s[-1])


def eigen_moduli(m) -> np.ndarray:
    """Moduli of the eigenvalues, descending."""
    return np.sort(np.abs(np.linalg.eigvals(np.asarray(m, dtype=float))))[::-1]


@dataclass(frozen=True, eq=False)
class Subspace:
    """Column-orthonormal basis of a subspace of ``R^d`` (rank 0 allowed)."""

    basis: np.ndarray

    @classmethod
    def from_vectors(cls, vecs, d: int | None = None) -> "Subspace":
        vecs = np.asarray(vecs, dtype=float)
        if vecs.ndim == 1:
            vecs = vecs[:, None]
        if vecs.shape[1] == 0:
            return cls(np.zeros((vecs.shape[0] if d is None else d, 0)))
        q, _ = np.linalg.qr(vecs)
        return cls(q)

    @classmethod
    def zero(cls, d: int) -> "Subspace":
        return cls(np.zeros((d, 0)))

    @property
    def d(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def contains(self, v, tol: float = 1e-8) -> bool:
        v = np.asarray(v, dtype=float)
        r = v - self.basis @ (self.basis.T @ v)
        return float(np.linalg.norm(r)) <= tol * max(1.0, float(np.linalg.norm(v)))


def _nullspace(op: np.ndarray, scale: float, tol: float, gap_factor: float) -> np.ndarray:
    """Right nullspace of ``op`` with an explicit singular-gap test."""
    _, s, vt = np.linalg.svd(op)
    n = op.shape[1]
    s_full = np.zeros(n)
    s_full[: len(s)] = s
    cut = tol * max(scale, 1e-300)
    null = s_full <= cut
    grey = (s_full > cut) & (s_full <= cut * gap_factor)
    if grey.any():
        raise RankAmbiguous(f"singular values {s_full[grey]} lie between {cut:.1e} and {cut * gap_factor:.1e}")
    rank = int(null.sum())
    if rank == 0:
        return np.zeros((n, 0))
    return vt[n - rank:].T


def solve_commutant(p, q, tol: float = 1e-12, gap_factor: float = GAP_FACTOR) -> Subspace:
    """Orthonormal basis of ``{X : P X = X Q}`` in row-major ``vec`` coordinates.

    Row-major ``vec(P X) = (P kron I) vec(X)`` and ``vec(X Q) = (I kron Q^T) vec(X)``.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = p.shape[0]
    if p.shape != (d, d) or q.shape != (d, d):
        raise ValueError("solve_commutant needs square matrices of equal size")
    eye = np.eye(d)
    op = np.kron(p, eye) - np.kron(eye, q.T)
    scale = opnorm(p) + opnorm(q)
    return Subspace(_nullspace(op, scale, tol * d, gap_factor))


def unvec(v, d: int) -> np.ndarray:
    return np.asarray(v, dtype=float).reshape(d, d)


def subspace_angle(u: Subspace, v: Subspace) -> float:
    """Largest principal angle between equal-rank subspaces."""
    if u.d != v.d or u.rank != v.rank:
        raise RankMismatch(f"ranks {u.rank} and {v.rank} in dimensions {u.d} and {v.d}")
    if u.rank == 0:
        return 0.0
    resid = v.basis - u.basis @ (u.basis.T @ v.basis)
    sin = float(np.linalg.norm(resid, 2))
    cos = float(np.linalg.svd(u.basis.T @ v.basis, compute_uv=False)[-1])
    return float(np.arctan2(sin, cos))


def subspace_intersect(u: Subspace, v: Subspace, tol_angle: float = TOL_ANGLE,
                       ambiguous_angle: float = 1e-4) -> Subspace:
    """Intersection decided by principal angles.

    Directions of ``v`` at angle below ``tol_angle`` from ``u`` are kept; an
    angle in ``[tol_angle, ambiguous_angle)`` raises RankAmbiguous.
    """
    if u.d != v.d:
        raise RankMismatch(f"ambient dimensions {u.d} and {v.d}")
    if u.rank == 0 or v.rank == 0:
        return Subspace.zero(u.d)
    resid = v.basis - u.basis @ (u.basis.T @ v.basis)
    _, s, wt = np.linalg.svd(resid)
    sines = np.zeros(v.rank)
    sines[: len(s)] = s
    grey = (sines >= tol_angle) & (sines < ambiguous_angle)
    if grey.any():
        raise RankAmbiguous(f"principal angle sines {sines[grey]} are neither small nor large")
    keep = sines < tol_angle
    if not keep.any():
        return Subspace.zero(u.d)
    w = wt[keep].T
    return Subspace.from_vectors(v.basis @ w)


def canonical_sign(v: np.ndarray) -> np.ndarray:
    """Flip ``v`` so that its first entry of non-negligible size is positive."""
    v = np.asarray(v, dtype=float)
    idx = np.flatnonzero(np.abs(v) > 1e-12 * max(1.0, float(np.abs(v).max(initial=0.0))))
    if len(idx) and v[idx[0]] < 0:
        return -v
    return v


def canonical_frame(basis: np.ndarray) -> np.ndarray:
    """Column-wise sign normalization of an orthonormal basis."""
    return np.column_stack([canonical_sign(c) for c in np.asarray(basis).T]) if basis.shape[1] else basis


def random_orthogonal(rng: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))
