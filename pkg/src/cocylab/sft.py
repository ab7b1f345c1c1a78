"""Two-sided subshifts of finite type.

Points are bi-infinite sequences that are eventually periodic in both
directions. Such a point is stored as a left period, a finite core anchored at
an integer index, and a right period; for ``i < start`` the sequence repeats
``left`` so that ``x[start - 1] == left[-1]``, and past the core it repeats
``right`` starting with ``right[0]``. Every constructor returns the canonical
representative, so equality and hashing agree with equality of sequences.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .errors import BracketUndefined, NoFixedPoint, NotMixingError, WindowTooSmall

Word = tuple[int, ...]

DEFAULT_MAX_PERIOD = 12
DEFAULT_WINDOW = 10


def primitive_root(word: Sequence[int]) -> Word:
    word = tuple(word)
    n = len(word)
    for p in range(1, n + 1):
        if n % p == 0 and word[:p] * (n // p) == word:
            return word[:p]
    return word


def min_rotation(word: Sequence[int]) -> Word:
    word = tuple(word)
    return min(word[i:] + word[:i] for i in range(len(word))) if word else word


def _rotate(word: Word, shift: int) -> Word:
    """Word ``r`` with ``r[j] == word[(j + shift) % len(word)]``."""
    s = shift % len(word)
    return word[s:] + word[:s]


def parse_word(text) -> Word:
    """Parse ``"0110"`` (or ``"10,11,3"`` for alphabets above ten symbols)."""
    if isinstance(text, str):
        if "," in text:
            return tuple(int(c) for c in text.split(",") if c)
        return tuple(int(c) for c in text)
    return tuple(int(c) for c in text)


def format_word(word: Sequence[int]) -> str:
    if any(s > 9 for s in word):
        return ",".join(str(s) for s in word) + ("," if len(word) == 1 else "")
    return "".join(str(s) for s in word)


# --------------------------------------------------------------------------
# transition structure


@dataclass(frozen=True)
class TransitionStructure:
    allowed: tuple[tuple[bool, ...], ...]
    mixing_power: int | None = None

    def __post_init__(self):
        k = len(self.allowed)
        if k == 0:
            raise ValueError("empty transition matrix")
        for r, row in enumerate(self.allowed):
            if len(row) != k:
                raise ValueError(f"transition row {r} has length {len(row)}, expected {k}")
        q = self.matrix
        if not q.any(axis=1).all():
            raise ValueError(f"symbol {int(np.argmin(q.any(axis=1)))} has no successor")
        if not q.any(axis=0).all():
            raise ValueError(f"symbol {int(np.argmin(q.any(axis=0)))} has no predecessor")

    @classmethod
    def from_matrix(cls, q, mixing_power=None) -> "TransitionStructure":
        rows = tuple(tuple(bool(v) for v in row) for row in q)
        return cls(rows, mixing_power)

    @classmethod
    def full_shift(cls, k: int) -> "TransitionStructure":
        return cls.from_matrix(np.ones((k, k), dtype=bool), mixing_power=1)

    @property
    def k(self) -> int:
        return len(self.allowed)

    @cached_property
    def matrix(self) -> np.ndarray:
        return np.array(self.allowed, dtype=bool)

    def allows(self, a: int, b: int) -> bool:
        return self.allowed[a][b]

    def successors(self, a: int) -> list[int]:
        return [b for b in range(self.k) if self.allowed[a][b]]

    def is_admissible(self, word: Sequence[int], cyclic: bool = False) -> bool:
        if any(not 0 <= s < self.k for s in word):
            return False
        ok = all(self.allowed[a][b] for a, b in zip(word, word[1:]))
        if cyclic and word:
            ok = ok and self.allowed[word[-1]][word[0]]
        return ok

    def fixed_symbols(self) -> list[int]:
        return [a for a in range(self.k) if self.allowed[a][a]]

    def admits(self, x: "SftPoint") -> bool:
        """True when every adjacent pair of the sequence ``x`` is allowed."""
        seq = x.left + x.core + x.right
        if not self.is_admissible(seq):
            return False
        return self.allows(x.left[-1], x.left[0]) and self.allows(x.right[-1], x.right[0])

    def to_json(self):
        return [[int(v) for v in row] for row in self.allowed]


def validate_mixing(ts: TransitionStructure, max_power: int | None = None) -> int:
    """Smallest ``N`` with every entry of ``Q**N`` positive.

    The default bound ``(k - 1)**2 + 1`` is Wielandt's, so a failure with the
    default is a proof that the shift is not mixing.
    """
    k = ts.k
    if max_power is None:
        max_power = (k - 1) ** 2 + 1
    if max_power < 1:
        raise ValueError("max_power must be >= 1")
    q = ts.matrix.astype(np.int64)
    p = q.copy()
    for n in range(1, max_power + 1):
        if (p > 0).all():
            return n
        p = ((p @ q) > 0).astype(np.int64)
    raise NotMixingError(f"Q**N has zero entries for every N <= {max_power}: {_diagnose(ts)}")


def _diagnose(ts: TransitionStructure) -> str:
    k = ts.k
    reach = np.eye(k, dtype=bool) | ts.matrix
    for _ in range(k):
        reach = reach | ((reach.astype(int) @ reach.astype(int)) > 0)
    if not reach.all():
        return "reducible (transition graph is not strongly connected)"
    # period of an irreducible graph = gcd of differences of BFS levels along edges
    level = {0: 0}
    queue = deque([0])
    while queue:
        a = queue.popleft()
        for b in ts.successors(a):
            if b not in level:
                level[b] = level[a] + 1
                queue.append(b)
    g = 0
    for a in range(k):
        for b in ts.successors(a):
            g = math.gcd(g, level[a] + 1 - level[b])
    return f"irreducible with period {g}" if g > 1 else "not mixing within the power bound"


def admissible_words(ts: TransitionStructure, length: int) -> list[Word]:
    """All admissible words of the given length in lexicographic order."""
    if length <= 0:
        return [()]
    out: list[Word] = []
    stack: list[Word] = [(a,) for a in reversed(range(ts.k))]
    while stack:
        w = stack.pop()
        if len(w) == length:
            out.append(w)
            continue
        for b in reversed(ts.successors(w[-1])):
            stack.append(w + (b,))
    return out


# --------------------------------------------------------------------------
# metric


@dataclass(frozen=True)
class Metric:
    alpha: float
    beta: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.beta > 0.0:
            raise ValueError(f"beta must be positive, got {self.beta}")

    def distance(self, x: "SftPoint", y: "SftPoint") -> float:
        return d_alpha(x, y, self)


# --------------------------------------------------------------------------
# points


@dataclass(frozen=True)
class SftPoint:
    left: Word
    core: Word
    start: int
    right: Word

    @classmethod
    def build(cls, left, core, start: int, right) -> "SftPoint":
        left, core, right = tuple(left), tuple(core), tuple(right)
        if not left or not right:
            raise ValueError("periods must be nonempty")
        left, right = primitive_root(left), primitive_root(right)
        a, b = start, start + len(core) - 1
        nl, nr = len(left), len(right)

        def x(i):
            if i < a:
                return left[(i - a) % nl]
            if i > b:
                return right[(i - b - 1) % nr]
            return core[i - a]

        def lseq(i):
            return left[(i - a) % nl]

        def rseq(i):
            return right[(i - b - 1) % nr]

        span = nl * nr // math.gcd(nl, nr)
        i = a
        limit = b + span + 1
        while i <= limit and x(i) == lseq(i):
            i += 1
        if i > limit:
            word = _rotate(left, -a)
            return cls(word, (), 0, word)
        a2 = i
        j = b
        lower = a - span - 1
        while j >= lower and x(j) == rseq(j):
            j -= 1
        b2 = max(j, a2 - 1)
        new_core = tuple(x(t) for t in range(a2, b2 + 1))
        return cls(_rotate(left, a2 - a), new_core, a2, _rotate(right, b2 - b))

    @classmethod
    def periodic(cls, word, start: int = 0) -> "SftPoint":
        """The point with ``x[i] == word[(i - start) % len(word)]``."""
        word = tuple(word)
        return cls.build(word, (), start, word)

    @classmethod
    def homoclinic(cls, symbol: int, core, start: int) -> "SftPoint":
        return cls.build((symbol,), core, start, (symbol,))

    @property
    def end(self) -> int:
        return self.start + len(self.core) - 1

    def __getitem__(self, i: int) -> int:
        a = self.start
        if i < a:
            return self.left[(i - a) % len(self.left)]
        b = a + len(self.core) - 1
        if i > b:
            return self.right[(i - b - 1) % len(self.right)]
        return self.core[i - a]

    def window(self, lo: int, hi: int) -> Word:
        """Symbols ``x[lo], ..., x[hi]`` (inclusive)."""
        return tuple(self[i] for i in range(lo, hi + 1))

    def left_tail(self, i: int) -> int:
        return self.left[(i - self.start) % len(self.left)]

    def right_tail(self, i: int) -> int:
        return self.right[(i - self.end - 1) % len(self.right)]

    @property
    def is_periodic(self) -> bool:
        return not self.core and self.left == self.right and self.start == 0

    def is_homoclinic_to(self, symbol: int) -> bool:
        return self.left == (symbol,) and self.right == (symbol,)

    def sort_key(self):
        return (len(self.core), self.start, self.core, self.left, self.right)

    def to_json(self) -> dict:
        return {
            "left": format_word(self.left),
            "core": format_word(self.core),
            "start": self.start,
            "right": format_word(self.right),
        }

    @classmethod
    def from_json(cls, obj) -> "SftPoint":
        return cls.build(parse_word(obj["left"]), parse_word(obj.get("core", "")),
                         int(obj.get("start", 0)), parse_word(obj["right"]))

    def __repr__(self):
        core = format_word(self.core) or "-"
        return f"SftPoint({format_word(self.left)}^inf [{core}@{self.start}] {format_word(self.right)}^inf)"


def shift(x: SftPoint, n: int = 1) -> SftPoint:
    """``shift(x, n)[i] == x[i + n]``."""
    if n == 0:
        return x
    return SftPoint.build(x.left, x.core, x.start - n, x.right)


def _tail_span(x: SftPoint, y: SftPoint) -> int:
    a = len(x.left) * len(y.left) // math.gcd(len(x.left), len(y.left))
    b = len(x.right) * len(y.right) // math.gcd(len(x.right), len(y.right))
    return max(a, b)


def first_difference(x: SftPoint, y: SftPoint) -> int | None:
    """``min |i|`` over indices where ``x`` and ``y`` differ, None if equal."""
    if x == y:
        return None
    bound = max(abs(x.start), abs(y.start), abs(x.end), abs(y.end)) + _tail_span(x, y) + 2
    for r in range(bound + 1):
        if x[r] != y[r] or x[-r] != y[-r]:
            return r
    raise AssertionError("distinct points agree on the whole search window")


def d_alpha(x: SftPoint, y: SftPoint, metric: Metric | float) -> float:
    alpha = metric.alpha if isinstance(metric, Metric) else float(metric)
    r = first_difference(x, y)
    return 0.0 if r is None else alpha ** r


def splice(past: SftPoint, future: SftPoint, cut: int) -> SftPoint:
    """Sequence equal to ``past`` at indices ``<= cut`` and ``future`` after."""
    lo = min(past.start, cut)
    hi = max(future.end, cut)
    core = [past[i] for i in range(lo, cut + 1)] + [future[i] for i in range(cut + 1, hi + 1)]
    left = _rotate(past.left, lo - past.start)
    right = _rotate(future.right, hi - future.end)
    return SftPoint.build(left, core, lo, right)


def bracket(x: SftPoint, y: SftPoint) -> SftPoint:
    """The point agreeing with ``x`` on ``i >= 0`` and with ``y`` on ``i <= 0``."""
    if x[0] != y[0]:
        raise BracketUndefined(f"x_0 = {x[0]} differs from y_0 = {y[0]}")
    return splice(y, x, 0)


def stable_radius(x: SftPoint, y: SftPoint) -> int | None:
    """Smallest ``R`` with ``x[i] == y[i]`` for all ``i >= R``.

    Returns None when the futures never merge. Equal points get a radius below
    both cores, which is harmless for the holonomy depth computation.
    """
    span = _tail_span(x, y)
    hi = max(x.end, y.end) + 1
    if any(x[i] != y[i] for i in range(hi, hi + span + 1)):
        return None
    lo = min(x.start, y.start) - span - 1
    for i in range(hi - 1, lo - 1, -1):
        if x[i] != y[i]:
            return i + 1
    return lo


def unstable_radius(x: SftPoint, y: SftPoint) -> int | None:
    """Smallest ``R`` with ``x[i] == y[i]`` for all ``i <= -R``."""
    span = _tail_span(x, y)
    lo = min(x.start, y.start) - 1
    if any(x[i] != y[i] for i in range(lo - span, lo + 1)):
        return None
    hi = max(x.end, y.end) + span + 1
    for i in range(lo + 1, hi + 1):
        if x[i] != y[i]:
            return 1 - i
    return -hi


# --------------------------------------------------------------------------
# periodic orbits


@dataclass(frozen=True)
class PeriodicOrbit:
    word: Word

    @classmethod
    def from_word(cls, word) -> "PeriodicOrbit":
        return cls(min_rotation(primitive_root(tuple(word))))

    @property
    def period(self) -> int:
        return len(self.word)

    def point(self, offset: int = 0) -> SftPoint:
        """Canonical point of the orbit shifted by ``offset``."""
        return SftPoint.periodic(self.word, -offset)

    def points(self) -> list[SftPoint]:
        return [self.point(j) for j in range(self.period)]

    def to_json(self) -> str:
        return format_word(self.word)

    def __repr__(self):
        return f"PeriodicOrbit({format_word(self.word)})"


def lyndon_words(k: int, n: int) -> Iterator[Word]:
    """Lyndon words of length <= n over ``range(k)`` (Duval's generator)."""
    w = [-1]
    while w:
        w[-1] += 1
        m = len(w)
        yield tuple(w)
        while len(w) < n:
            w.append(w[len(w) - m])
        while w and w[-1] == k - 1:
            w.pop()


def enumerate_periodic_orbits(ts: TransitionStructure,
                              max_period: int = DEFAULT_MAX_PERIOD) -> list[PeriodicOrbit]:
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    orbits = [PeriodicOrbit(w) for w in lyndon_words(ts.k, max_period)
              if ts.is_admissible(w, cyclic=True)]
    orbits.sort(key=lambda o: (o.period, o.word))
    return orbits


def count_periodic_points(orbits: Sequence[PeriodicOrbit], n: int) -> int:
    """Number of points of period dividing ``n`` spanned by primitive orbits."""
    return sum(o.period for o in orbits if n % o.period == 0)


def fixed_point(ts: TransitionStructure, symbol: int | None = None) -> PeriodicOrbit:
    if symbol is None:
        fixed = ts.fixed_symbols()
        if not fixed:
            raise NoFixedPoint("no symbol has a self-loop")
        symbol = fixed[0]
    if not ts.allows(symbol, symbol):
        raise NoFixedPoint(f"Q[{symbol},{symbol}] is false")
    return PeriodicOrbit((symbol,))


def homoclinic_points(ts: TransitionStructure, p0: PeriodicOrbit,
                      window: int = DEFAULT_WINDOW) -> list[SftPoint]:
    """Points ``a^inf w a^inf`` with ``len(w) <= window``.

    The core word is centred, starting at index ``-(len(w) // 2)``, so every
    returned point equals ``a`` outside ``[-window, window]``.
    """
    if p0.period != 1 or not ts.allows(p0.word[0], p0.word[0]):
        raise NoFixedPoint(f"{p0} is not a fixed point")
    a = p0.word[0]
    found = {SftPoint.periodic((a,))}
    stack: list[Word] = [(b,) for b in reversed(ts.successors(a))] if window > 0 else []
    while stack:
        w = stack.pop()
        if ts.allows(w[-1], a):
            found.add(SftPoint.homoclinic(a, w, -(len(w) // 2)))
        if len(w) < window:
            for b in reversed(ts.successors(w[-1])):
                stack.append(w + (b,))
    return sorted(found, key=SftPoint.sort_key)


def closing_word(x: SftPoint, n: int) -> Word:
    a = x.left[0]
    if len(x.left) != 1 or x.right != (a,):
        raise WindowTooSmall(f"{x} is not homoclinic to a fixed point")
    if n < 1 or (x.core and (x.start < -n or x.end > n - 1)):
        raise WindowTooSmall(f"core of {x} extends beyond [{-n}, {n - 1}]")
    return x.window(-n, n - 1)


def closing_orbit(x: SftPoint, n: int, ts: TransitionStructure | None = None) -> PeriodicOrbit:
    """Periodic orbit repeating ``x[-n], ..., x[n-1]``."""
    word = closing_word(x, n)
    if ts is not None and not ts.is_admissible(word, cyclic=True):
        raise WindowTooSmall(f"closing seam {word[-1]}->{word[0]} is not allowed")
    return PeriodicOrbit.from_word(word)


def closing_point(x: SftPoint, n: int) -> SftPoint:
    """The anchored closing point ``q`` with ``q[i] == x[i]`` on ``[-n, n-1]``."""
    return SftPoint.periodic(closing_word(x, n), -n)


def connector(ts: TransitionStructure, src: int, dst: int) -> Word:
    """Lexicographically least shortest path ``src -> ... -> dst``.

    Returns the intermediate symbols only (empty when ``src -> dst`` is allowed).
    """
    dist = {dst: 0}
    queue = deque([dst])
    while queue:
        b = queue.popleft()
        for a in range(ts.k):
            if ts.allows(a, b) and a not in dist:
                dist[a] = dist[b] + 1
                queue.append(a)
    if not any(ts.allows(src, b) and b in dist for b in range(ts.k)):
        raise NotMixingError(f"no path from {src} to {dst}")
    path = []
    cur = src
    remaining = min(dist[b] for b in ts.successors(cur) if b in dist)
    while True:
        nxt = min(b for b in ts.successors(cur) if dist.get(b) == remaining)
        if remaining == 0:
            break
        path.append(nxt)
        cur = nxt
        remaining -= 1
    return tuple(path)


def homoclinic_surrogate(ts: TransitionStructure, symbol: int, x: SftPoint, n: int) -> SftPoint:
    """A point homoclinic to ``symbol^inf`` that agrees with ``x`` on ``[-n, n]``."""
    mid = x.window(-n, n)
    pre = connector(ts, symbol, mid[0])
    post = connector(ts, mid[-1], symbol)
    return SftPoint.homoclinic(symbol, pre + mid + post, -n - len(pre))


def symbol_array(points: Sequence[SftPoint], lo: int, hi: int) -> np.ndarray:
    """Array of shape (len(points), hi - lo + 1) with the symbols on ``[lo, hi]``."""
    return np.array([x.window(lo, hi) for x in points], dtype=np.int16).reshape(len(points), hi - lo + 1)


# --------------------------------------------------------------------------
# higher block presentation (power shifts)


class BlockCode:
    """The ``N``-block presentation of ``(ts, shift**N)``."""

    def __init__(self, ts: TransitionStructure, n: int):
        if n < 1:
            raise ValueError("block length must be >= 1")
        self.base = ts
        self.n = n
        self.blocks: list[Word] = admissible_words(ts, n)
        self.index = {b: i for i, b in enumerate(self.blocks)}
        q = [[ts.allows(u[-1], v[0]) for v in self.blocks] for u in self.blocks]
        self.ts = TransitionStructure.from_matrix(q)

    def encode(self, word: Sequence[int]) -> Word:
        n = self.n
        return tuple(self.index[tuple(word[i:i + n])] for i in range(0, len(word), n))

    def decode(self, word: Sequence[int]) -> Word:
        return tuple(s for b in word for s in self.blocks[b])

    def _block_period(self, seq, anchor: int, count: int) -> Word:
        n = self.n
        return tuple(self.index[tuple(seq(j * n + t) for t in range(n))]
                     for j in range(anchor, anchor + count))

    def blockify(self, x: SftPoint) -> SftPoint:
        """The block sequence ``y[j] = (x[jN], ..., x[jN + N - 1])``."""
        n = self.n
        a, b = x.start, x.end
        ab = a // n
        bb = max(b // n, ab - 1)
        nl = len(x.left) * n // math.gcd(len(x.left), n) // n
        nr = len(x.right) * n // math.gcd(len(x.right), n) // n
        left = self._block_period(x.left_tail, ab - nl, nl)
        right = self._block_period(x.right_tail, bb + 1, nr)
        core = self._block_period(x.__getitem__, ab, bb - ab + 1)
        return SftPoint.build(left, core, ab, right)

    def unblockify(self, y: SftPoint) -> SftPoint:
        n = self.n
        left = self.decode(y.left)
        right = self.decode(y.right)
        core = self.decode(y.core)
        return SftPoint.build(left, core, y.start * n, right)

    def fixed_block(self, orbit: PeriodicOrbit) -> PeriodicOrbit:
        """The block fixed point induced by a periodic orbit of period dividing N."""
        if self.n % orbit.period:
            raise ValueError(f"orbit period {orbit.period} does not divide {self.n}")
        word = orbit.word * (self.n // orbit.period)
        return PeriodicOrbit((self.index[word],))


# --------------------------------------------------------------------------
# seeded sampling


def random_walk(ts: TransitionStructure, rng: np.random.Generator, length: int,
                first: int | None = None) -> Word:
    """Uniform random admissible walk (each step uniform over successors)."""
    if length <= 0:
        return ()
    a = int(rng.integers(ts.k)) if first is None else first
    out = [a]
    for _ in range(length - 1):
        succ = ts.successors(out[-1])
        out.append(succ[int(rng.integers(len(succ)))])
    return tuple(out)


def random_point(ts: TransitionStructure, rng: np.random.Generator, radius: int,
                 tails: Sequence[PeriodicOrbit] | None = None) -> SftPoint:
    """Random point whose symbols on ``[-radius, radius]`` form a random walk.

    The two tails are periodic orbits drawn from ``tails`` (default: orbits of
    period at most 3), glued on with shortest connectors.
    """
    if tails is None:
        tails = enumerate_periodic_orbits(ts, 3)
    mid = random_walk(ts, rng, 2 * radius + 1)
    lo = tails[int(rng.integers(len(tails)))].word
    hi = tails[int(rng.integers(len(tails)))].word
    pre = connector(ts, lo[-1], mid[0])
    post = connector(ts, mid[-1], hi[0])
    core = pre + mid + post
    return SftPoint.build(lo, core, -radius - len(pre), hi)


def random_stable_partner(ts: TransitionStructure, rng: np.random.Generator, x: SftPoint,
                          cut: int, radius: int | None = None, tries: int = 100) -> SftPoint:
    """Random ``y`` with ``y[i] == x[i]`` for ``i > cut``."""
    radius = abs(cut) + 3 if radius is None else radius
    for _ in range(tries):
        z = random_point(ts, rng, radius)
        if ts.allows(z[cut], x[cut + 1]):
            return splice(z, x, cut)
    raise NotMixingError("could not find an admissible splice")


def random_unstable_partner(ts: TransitionStructure, rng: np.random.Generator, x: SftPoint,
                            cut: int, radius: int | None = None, tries: int = 100) -> SftPoint:
    """Random ``y`` with ``y[i] == x[i]`` for ``i <= cut``."""
    radius = abs(cut) + 3 if radius is None else radius
    for _ in range(tries):
        z = random_point(ts, rng, radius)
        if ts.allows(x[cut], z[cut + 1]):
            return splice(x, z, cut)
    raise NotMixingError("could not find an admissible splice")
