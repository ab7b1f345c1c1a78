"""Locally constant linear cocycles over a subshift of finite type.

A generator with window radius ``m`` assigns a matrix to every admissible word
of length ``2m + 1``; its value at ``x`` is ``table[x[-m], ..., x[m]]``.
Products follow the usual cocycle convention: the most recent factor is
multiplied on the left, ``A^n_x = A(shift^{n-1} x) ... A(x)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import BadContext, DimensionMismatch, SingularMatrix
from .numerics import inverse, matdist
from .sft import (BlockCode, Metric, SftPoint, TransitionStructure, admissible_words,
                  format_word, parse_word)
from .sft import PeriodicOrbit

RESCALE_EVERY = 64


class Generator:
    """Matrix-valued function of the symbols ``x[-m..m]``.

    Parameters
    ----------
    ts : TransitionStructure
    radius : int
        Window radius ``m``.
    table : mapping
        Admissible words of length ``2m + 1`` to invertible ``d x d`` arrays.
    """

    def __init__(self, ts: TransitionStructure, radius: int, table: Mapping[Sequence[int], np.ndarray]):
        if radius < 0:
            raise ValueError("window radius must be nonnegative")
        self.ts = ts
        self.radius = radius
        self.words = admissible_words(ts, 2 * radius + 1)
        given = {tuple(w): np.asarray(v, dtype=float) for w, v in table.items()}
        missing = [w for w in self.words if w not in given]
        if missing:
            raise ValueError(f"generator table misses {len(missing)} words, e.g. {format_word(missing[0])}")
        allowed = set(self.words)
        extra = [w for w in given if w not in allowed]
        if extra:
            raise ValueError(f"generator table has inadmissible or wrong-length word {format_word(extra[0])}")
        mats = np.array([given[w] for w in self.words])
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise DimensionMismatch("generator values must be square matrices of one size")
        if not np.all(np.isfinite(mats)):
            raise ValueError("generator has non-finite entries")
        self.mats = mats
        self.mats.setflags(write=False)
        try:
            self.inv_mats = np.array([inverse(a) for a in mats])
        except SingularMatrix as exc:
            raise SingularMatrix(f"generator value is not invertible: {exc}") from None
        self.inv_mats.setflags(write=False)
        width = 2 * radius + 1
        self._weights = ts.k ** np.arange(width - 1, -1, -1, dtype=np.int64)
        self._lookup = np.full(ts.k ** width, -1, dtype=np.int64)
        for i, w in enumerate(self.words):
            self._lookup[int(np.dot(w, self._weights))] = i

    # construction helpers -------------------------------------------------

    @classmethod
    def from_function(cls, ts, radius: int, fn: Callable[[tuple], np.ndarray]) -> "Generator":
        return cls(ts, radius, {w: fn(w) for w in admissible_words(ts, 2 * radius + 1)})

    @classmethod
    def constant(cls, ts, mat, radius: int = 0) -> "Generator":
        mat = np.asarray(mat, dtype=float)
        return cls.from_function(ts, radius, lambda w: mat)

    @classmethod
    def random_near(cls, ts, radius: int, base, eps: float, rng: np.random.Generator) -> "Generator":
        """``base + eps * G`` with independent standard Gaussian ``G`` per word."""
        base = np.asarray(base, dtype=float)
        d = base.shape[0]
        return cls.from_function(ts, radius, lambda w: base + eps * rng.standard_normal((d, d)))

    @property
    def d(self) -> int:
        return self.mats.shape[1]

    @property
    def table(self) -> dict:
        return {w: self.mats[i] for i, w in enumerate(self.words)}

    def value(self, word) -> np.ndarray:
        return self.mats[self.index_of(word)]

    def index_of(self, word) -> int:
        word = tuple(word)
        if len(word) != 2 * self.radius + 1:
            raise BadContext(f"expected a word of length {2 * self.radius + 1}, got {len(word)}")
        if any(not 0 <= s < self.ts.k for s in word):
            raise BadContext(f"symbol out of range in {word}")
        i = int(self._lookup[int(np.dot(word, self._weights))])
        if i < 0:
            raise BadContext(f"word {format_word(word)} is not admissible")
        return i

    def at(self, x: SftPoint) -> np.ndarray:
        m = self.radius
        return self.value(x.window(-m, m))

    def indices(self, symbols: np.ndarray) -> np.ndarray:
        """Table indices of every length-``2m+1`` window of a symbol array.

        ``symbols`` has shape ``(..., L)``; the result has shape ``(..., L - 2m)``.
        """
        symbols = np.asarray(symbols, dtype=np.int64)
        width = 2 * self.radius + 1
        n = symbols.shape[-1] - width + 1
        if n < 0:
            raise BadContext("context shorter than the generator window")
        codes = np.zeros(symbols.shape[:-1] + (n,), dtype=np.int64)
        for t in range(width):
            codes = codes + self._weights[t] * symbols[..., t:t + n]
        idx = self._lookup[codes]
        if (idx < 0).any():
            raise BadContext("context contains a forbidden transition")
        return idx

    def to_json(self) -> dict:
        return {
            "window_radius": self.radius,
            "entries": {format_word(w): self.mats[i].tolist() for i, w in enumerate(self.words)},
        }

    @classmethod
    def from_json(cls, ts, obj) -> "Generator":
        radius = int(obj["window_radius"])
        entries = obj["entries"]
        return cls(ts, radius, {parse_word(w): np.array(v, dtype=float) for w, v in entries.items()})

    def __eq__(self, other):
        return (isinstance(other, Generator) and self.ts == other.ts and self.radius == other.radius
                and np.array_equal(self.mats, other.mats))

    def __hash__(self):
        return hash((self.ts, self.radius, self.mats.tobytes()))

    def __repr__(self):
        return f"Generator(k={self.ts.k}, d={self.d}, m={self.radius}, words={len(self.words)})"


@dataclass(frozen=True)
class CocycleSystem:
    gen: Generator
    metric: Metric
    label: str = field(default="", compare=False)

    @property
    def ts(self) -> TransitionStructure:
        return self.gen.ts

    @property
    def d(self) -> int:
        return self.gen.d

    @property
    def radius(self) -> int:
        return self.gen.radius

    def at(self, x: SftPoint) -> np.ndarray:
        return self.gen.at(x)

    def with_generator(self, gen: Generator, label: str | None = None) -> "CocycleSystem":
        return CocycleSystem(gen, self.metric, self.label if label is None else label)


def ordered_product(mats: np.ndarray, idx) -> np.ndarray:
    """``mats[idx[-1]] @ ... @ mats[idx[0]]`` (last index leftmost)."""
    d = mats.shape[1]
    out = np.eye(d)
    for i in idx:
        out = mats[i] @ out
    return out


def batched_product(mats: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Row-wise ordered products for an index array of shape ``(P, n)``."""
    idx = np.asarray(idx)
    p, n = idx.shape
    d = mats.shape[1]
    out = np.broadcast_to(np.eye(d), (p, d, d)).copy()
    for j in range(n):
        out = np.matmul(mats[idx[:, j]], out)
    return out


def _indices_along(gen: Generator, x: SftPoint, lo: int, hi: int) -> np.ndarray:
    """Table indices of ``A(shift^j x)`` for ``lo <= j <= hi``."""
    m = gen.radius
    return gen.indices(np.array(x.window(lo - m, hi + m)))


def evaluate(cs: CocycleSystem | Generator, x: SftPoint, n: int) -> np.ndarray:
    """``A^n_x`` for any integer ``n``; negative powers invert backwards."""
    gen = cs.gen if isinstance(cs, CocycleSystem) else cs
    if n == 0:
        return np.eye(gen.d)
    if n > 0:
        return ordered_product(gen.mats, _indices_along(gen, x, 0, n - 1))
    idx = _indices_along(gen, x, n, -1)[::-1]
    return ordered_product(gen.inv_mats, idx)


def evaluate_scaled(cs: CocycleSystem | Generator, x: SftPoint, n: int) -> tuple[np.ndarray, float]:
    """``A^n_x`` as ``(M, s)`` with ``A^n_x = exp(s) M`` and ``||M|| = 1``.

    Renormalizes every few factors so that long products of strongly
    non-conformal matrices do not overflow.
    """
    gen = cs.gen if isinstance(cs, CocycleSystem) else cs
    if n == 0:
        return np.eye(gen.d), 0.0
    if n > 0:
        mats, idx = gen.mats, _indices_along(gen, x, 0, n - 1)
    else:
        mats, idx = gen.inv_mats, _indices_along(gen, x, n, -1)[::-1]
    out = np.eye(gen.d)
    logscale = 0.0
    for j, i in enumerate(idx):
        out = mats[i] @ out
        if (j + 1) % RESCALE_EVERY == 0:
            s = np.linalg.norm(out, 2)
            out /= s
            logscale += math.log(s)
    s = np.linalg.norm(out, 2)
    return out / s, logscale + math.log(s)


def word_product(cs: CocycleSystem | Generator, context: Sequence[int]) -> np.ndarray:
    """Product of the ``len(context) - 2m`` factors determined by a context word.

    The first factor is the value on ``context[0 : 2m+1]``.
    """
    gen = cs.gen if isinstance(cs, CocycleSystem) else cs
    if len(context) < 2 * gen.radius:
        raise BadContext(f"context of length {len(context)} is shorter than 2m = {2 * gen.radius}")
    return ordered_product(gen.mats, gen.indices(np.array(context, dtype=np.int64)))


def product_along_cyclic_word(cs: CocycleSystem | Generator, p: PeriodicOrbit) -> np.ndarray:
    """Return map ``A^k_p`` at the canonical point of the orbit."""
    return evaluate(cs, p.point(), p.period)


def conjugate_system(cs: CocycleSystem, c, label: str | None = None) -> CocycleSystem:
    """The system ``x -> C(shift x) B(x) C(x)^-1``.

    ``c`` is a constant matrix or a Generator over the same shift.
    """
    gen = cs.gen
    if isinstance(c, Generator):
        if c.ts != gen.ts:
            raise ValueError("conjugating field lives over a different shift")
        if c.d != gen.d:
            raise DimensionMismatch(f"field dimension {c.d} vs cocycle dimension {gen.d}")
        r = max(gen.radius, c.radius + 1)
        m, mc = gen.radius, c.radius

        def value(w):
            b = gen.value(w[r - m:r + m + 1])
            c0 = c.inv_mats[c.index_of(w[r - mc:r + mc + 1])]
            c1 = c.mats[c.index_of(w[r + 1 - mc:r + 2 + mc])]
            return c1 @ b @ c0

        new = Generator.from_function(gen.ts, r, value)
    else:
        c = np.asarray(c, dtype=float)
        if c.shape != (gen.d, gen.d):
            raise DimensionMismatch(f"constant of shape {c.shape} vs dimension {gen.d}")
        ci = inverse(c)
        new = Generator(gen.ts, gen.radius, {w: c @ gen.mats[i] @ ci for i, w in enumerate(gen.words)})
    return cs.with_generator(new, label)


def perturb(cs: CocycleSystem, word, delta, label: str | None = None) -> CocycleSystem:
    """Copy of ``cs`` with ``delta`` added to the value on one window word."""
    table = cs.gen.table
    word = tuple(word)
    if word not in table:
        raise BadContext(f"word {format_word(word)} is not in the generator table")
    table[word] = table[word] + np.asarray(delta, dtype=float)
    return cs.with_generator(Generator(cs.ts, cs.radius, table), label)


def table_spread(gen: Generator) -> float:
    """Largest ``matdist`` between two table values."""
    mats, invs = gen.mats, gen.inv_mats
    w = len(mats)
    best = 0.0
    for i in range(w):
        a = np.linalg.norm(mats[i] - mats[i + 1:], 2, axis=(-2, -1)) if i + 1 < w else np.zeros(0)
        b = np.linalg.norm(invs[i] - invs[i + 1:], 2, axis=(-2, -1)) if i + 1 < w else np.zeros(0)
        if len(a):
            best = max(best, float(np.max(a + b)))
    return best


def holder_constant(cs: CocycleSystem) -> float:
    """Certified ``c`` with ``matdist(A(x), A(y)) <= c d(x, y)^beta``.

    Points at distance below ``alpha^m`` share the window and hence the value,
    so the largest table spread divided by ``alpha^(m beta)`` suffices.
    """
    m = cs.radius
    return table_spread(cs.gen) / cs.metric.alpha ** (m * cs.metric.beta)


def max_norms(gen: Generator) -> tuple[float, float]:
    """``(max ||A||, max ||A^-1||)`` over the table."""
    return (float(np.max(np.linalg.norm(gen.mats, 2, axis=(-2, -1)))),
            float(np.max(np.linalg.norm(gen.inv_mats, 2, axis=(-2, -1)))))


def power_system(cs: CocycleSystem, n: int) -> tuple[CocycleSystem, BlockCode]:
    """The cocycle ``A^n`` over the ``n``-block presentation of ``shift^n``.

    The block metric uses ``alpha**n`` so that block distances are comparable
    with distances of the underlying sequences.
    """
    if n < 1:
        raise ValueError("power must be >= 1")
    code = BlockCode(cs.ts, n)
    m = cs.radius
    mb = -(-m // n)

    def value(bw):
        syms = code.decode(bw)
        # syms covers x[-mb*n .. (mb+1)*n - 1]; the product needs x[-m .. n-1+m]
        off = mb * n - m
        return word_product(cs, syms[off:off + n + 2 * m])

    gen = Generator.from_function(code.ts, mb, value)
    return CocycleSystem(gen, Metric(cs.metric.alpha ** n, cs.metric.beta), f"{cs.label}^{n}"), code
