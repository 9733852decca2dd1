"""Hole-words, the hole-filling operator and Toeplitz sequences.

Coordinates are absolute throughout.  ``w^oo`` puts a copy of ``w`` at
coordinate 0.  Holes of a sequence are ranked over all of Z: rank 0 is the
first hole at a coordinate >= 0, ranks grow to the right and become negative
to the left of 0.  ``fill(x, y)`` writes ``y_k`` into the hole of ``x`` of
rank ``k``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Sequence, Union

from .config import Budget, current_budget

HOLE = "?"


class InsufficientWindow(ValueError):
    """A window does not determine the requested output."""

    def __init__(self, message: str, missing: tuple[int, int] | None = None):
        super().__init__(message)
        self.missing = missing


class RecursionCap(RuntimeError):
    pass


# ---------------------------------------------------------------- alphabet


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple

    def __post_init__(self):
        syms = tuple(self.symbols)
        object.__setattr__(self, "symbols", syms)
        if not syms:
            raise ValueError("alphabet must be nonempty")
        if HOLE in syms:
            raise ValueError("'?' is reserved for holes")
        if len(set(syms)) != len(syms):
            raise ValueError("alphabet symbols must be distinct")

    def __len__(self):
        return len(self.symbols)

    def __contains__(self, s):
        return s in self.symbols

    def __iter__(self):
        return iter(self.symbols)


def letters(k: int) -> tuple[str, ...]:
    """``k`` distinct one-character symbols, never '?'."""
    base = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"
    if k <= len(base):
        return tuple(base[:k])
    return tuple(base) + tuple(chr(0x100 + i) for i in range(k - len(base)))


# --------------------------------------------------------------- hole words


@dataclass(frozen=True)
class HoleWord:
    symbols: str

    @classmethod
    def parse(cls, text: str) -> "HoleWord":
        if not text:
            raise ValueError("empty hole-word")
        return cls(text)

    @property
    def p(self) -> int:
        return len(self.symbols)

    @cached_property
    def holes(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.symbols) if c == HOLE)

    @property
    def q(self) -> int:
        return len(self.holes)

    @property
    def gcd(self) -> int:
        return math.gcd(self.p, self.q)

    @property
    def coprime(self) -> bool:
        return self.gcd == 1

    @property
    def is_generator(self) -> bool:
        """The limit sequence has no holes."""
        s = self.symbols
        return self.q >= 1 and s[0] != HOLE and s[-1] != HOLE

    def letters(self) -> tuple[str, ...]:
        return tuple(sorted({c for c in self.symbols if c != HOLE}))

    def __str__(self):
        return self.symbols


# ------------------------------------------------------------------ windows


@dataclass(frozen=True)
class SequenceWindow:
    """``symbols`` occupy the coordinates ``[start, start + len(symbols))``."""

    start: int
    symbols: Union[str, tuple]

    @property
    def stop(self) -> int:
        return self.start + len(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def at(self, i: int):
        if not self.start <= i < self.stop:
            raise InsufficientWindow(f"coordinate {i} outside [{self.start},{self.stop})",
                                     (i, i + 1))
        return self.symbols[i - self.start]

    def restrict(self, a: int, b: int) -> "SequenceWindow":
        if a < self.start or b > self.stop or a > b:
            raise InsufficientWindow(
                f"[{a},{b}) not inside [{self.start},{self.stop})",
                (min(a, self.start), max(b, self.stop)),
            )
        return SequenceWindow(a, self.symbols[a - self.start:b - self.start])

    def shift(self, k: int) -> "SequenceWindow":
        """The window of ``sigma^k`` applied to this sequence."""
        return SequenceWindow(self.start - k, self.symbols)

    def hole_coordinates(self) -> list[int]:
        return [self.start + j for j, c in enumerate(self.symbols) if c == HOLE]

    def has_holes(self) -> bool:
        return any(c == HOLE for c in self.symbols)

    def text(self) -> str:
        if isinstance(self.symbols, str):
            return self.symbols
        return " ".join(_fmt(s) for s in self.symbols)

    def to_json(self) -> dict:
        syms = self.symbols if isinstance(self.symbols, str) else [list(s) if isinstance(s, tuple) else s for s in self.symbols]
        return {"start": self.start, "stop": self.stop, "symbols": syms}


def _fmt(s) -> str:
    if isinstance(s, tuple):
        return "(" + ",".join(str(t) for t in s) + ")"
    return str(s)


def _join(parts: list, like) -> Union[str, tuple]:
    if isinstance(like, str):
        return "".join(parts)
    return tuple(parts)


@dataclass(frozen=True)
class PeriodicSequence:
    """``pattern^oo`` with a copy of ``pattern`` starting at coordinate 0."""

    pattern: Union[str, tuple]

    @property
    def period(self) -> int:
        return len(self.pattern)

    @cached_property
    def holes(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.pattern) if c == HOLE)

    @cached_property
    def _hole_index(self) -> dict[int, int]:
        return {h: j for j, h in enumerate(self.holes)}

    @property
    def hole_count(self) -> int:
        return len(self.holes)

    def at(self, i: int):
        return self.pattern[i % self.period]

    def window(self, a: int, b: int) -> SequenceWindow:
        P = self.period
        if b <= a:
            return SequenceWindow(a, self.pattern[:0])
        r = a % P
        reps = (r + b - a) // P + 1
        big = self.pattern * reps
        return SequenceWindow(a, big[r:r + b - a])

    def rank(self, c: int) -> int:
        k, r = divmod(c, self.period)
        return k * self.hole_count + self._hole_index[r]

    def hole_coordinate(self, rank: int) -> int:
        k, j = divmod(rank, self.hole_count)
        return k * self.period + self.holes[j]

    def first_rank_at_or_after(self, c: int) -> int:
        """Rank of the first hole at coordinate >= c."""
        k, r = divmod(c, self.period)
        j = bisect.bisect_left(self.holes, r)
        return k * self.hole_count + j


Holey = Union[SequenceWindow, PeriodicSequence]


def periodic(w: Union[HoleWord, str]) -> PeriodicSequence:
    return PeriodicSequence(w.symbols if isinstance(w, HoleWord) else w)


# --------------------------------------------------------------------- fill


class _WindowRanks:
    """Hole ranks of a finite window that touches coordinate 0."""

    def __init__(self, x: SequenceWindow):
        if x.start > 0:
            raise InsufficientWindow(
                f"hole ranks need coordinates [0,{x.start}) which the window lacks",
                (0, x.start))
        if x.stop < 0:
            raise InsufficientWindow(
                f"hole ranks need coordinates [{x.stop},0) which the window lacks",
                (x.stop, 0))
        self.coords = x.hole_coordinates()
        self.zero = bisect.bisect_left(self.coords, 0)

    def rank_of_index(self, j: int) -> int:
        return j - self.zero


def _y_range(y: Holey):
    if isinstance(y, PeriodicSequence):
        return None
    return (y.start, y.stop)


def fill(x: Holey, y: Holey, start: int | None = None, stop: int | None = None) -> SequenceWindow:
    """``F_x(y)`` on ``[start, stop)``.

    Without an explicit range the output covers the largest interval that
    ``x`` and ``y`` determine.  An explicit range that is not determined
    raises :class:`InsufficientWindow` naming the missing coordinates.
    """
    yr = _y_range(y)
    if isinstance(x, PeriodicSequence):
        return _fill_periodic(x, y, yr, start, stop)
    return _fill_window(x, y, yr, start, stop)


def _fill_periodic(x: PeriodicSequence, y: Holey, yr, start, stop) -> SequenceWindow:
    Q = x.hole_count
    if start is None or stop is None:
        if Q == 0 or yr is None:
            raise InsufficientWindow("output range required: fill is defined everywhere")
        c, d = yr
        lo = x.hole_coordinate(c - 1) + 1
        hi = x.hole_coordinate(d)
        start = lo if start is None else start
        stop = hi if stop is None else stop
    if stop < start:
        stop = start
    base = x.window(start, stop).symbols
    if Q == 0:
        return SequenceWindow(start, base)
    r0 = x.first_rank_at_or_after(start)
    r1 = x.first_rank_at_or_after(stop)
    if r1 > r0:
        contents = _y_slice(y, yr, r0, r1, x)
        parts = list(base)
        k = 0
        for j, ch in enumerate(parts):
            if ch == HOLE:
                parts[j] = contents[k]
                k += 1
        base = _join(parts, base)
    return SequenceWindow(start, base)


def _y_slice(y: Holey, yr, r0: int, r1: int, x) -> Sequence:
    if yr is None:
        return y.window(r0, r1).symbols
    c, d = yr
    if r0 < c or r1 > d:
        lo = r0 if r0 < c else d
        hi = c if r0 < c else r1
        if isinstance(x, PeriodicSequence):
            missing = (x.hole_coordinate(lo), x.hole_coordinate(hi - 1) + 1)
        else:
            missing = None
        raise InsufficientWindow(
            f"fill needs y on ranks [{r0},{r1}) but y covers [{c},{d})", missing)
    return y.symbols[r0 - c:r1 - c]


def _fill_window(x: SequenceWindow, y: Holey, yr, start, stop) -> SequenceWindow:
    ranks = _WindowRanks(x)
    coords = ranks.coords
    if start is None or stop is None:
        lo, hi = x.start, x.stop
        if yr is not None:
            c, d = yr
            # holes with rank < c or >= d bound the determined interval
            j_lo = c - 1 + ranks.zero
            j_hi = d + ranks.zero
            if 0 <= j_lo < len(coords):
                lo = max(lo, coords[j_lo] + 1)
            elif j_lo >= len(coords):
                lo = max(lo, coords[-1] + 1 if coords else lo)
            if 0 <= j_hi < len(coords):
                hi = min(hi, coords[j_hi])
            elif j_hi < 0:
                hi = min(hi, coords[0] if coords else hi)
        start = lo if start is None else start
        stop = hi if stop is None else stop
    if stop < start:
        stop = start
    if start < x.start or stop > x.stop:
        raise InsufficientWindow(
            f"x covers [{x.start},{x.stop}) but [{start},{stop}) was requested",
            (min(start, x.start), max(stop, x.stop)))
    j0 = bisect.bisect_left(coords, start)
    j1 = bisect.bisect_left(coords, stop)
    base = x.symbols[start - x.start:stop - x.start]
    if j1 > j0:
        r0, r1 = ranks.rank_of_index(j0), ranks.rank_of_index(j1)
        contents = _y_slice(y, yr, r0, r1, x)
        parts = list(base)
        k = 0
        for j, ch in enumerate(parts):
            if ch == HOLE:
                parts[j] = contents[k]
                k += 1
        base = _join(parts, base)
    return SequenceWindow(start, base)


# ------------------------------------------------------------- T_n(w)


@lru_cache(maxsize=256)
def _period_word(symbols: str, n: int) -> str:
    if n == 1:
        return symbols
    inner = _period_word(symbols, n - 1)
    x = PeriodicSequence(symbols)
    P = len(symbols) ** n
    return fill(x, PeriodicSequence(inner), 0, P).symbols


def iterate(w: HoleWord, n: int, budget: Budget | None = None) -> SequenceWindow:
    """One period ``u_n`` of ``T_n(w)`` on ``[0, p^n)``."""
    if n < 1:
        raise ValueError("level must be >= 1")
    budget = budget or current_budget()
    budget.check_length(w.p**n, f"T_{n}({w})")
    return SequenceWindow(0, _period_word(w.symbols, n))


def level_sequence(w: HoleWord, n: int) -> PeriodicSequence:
    return PeriodicSequence(iterate(w, n).symbols)


def level_window(words: Sequence[HoleWord], a: int, b: int, levels: int) -> SequenceWindow:
    """Window of ``F_{w_1^oo} o ... o F_{w_{levels-1}^oo}(w_levels^oo)``.

    ``words`` beyond its end repeats its last entry.
    """
    return _nested_window(words, 0, a, b, levels)


def _word_at(words: Sequence[HoleWord], j: int) -> HoleWord:
    return words[j] if j < len(words) else words[-1]


def _nested_window(words, j, a, b, levels, depth=0, cap=10_000):
    if depth > cap:
        raise RecursionCap("window recursion did not terminate")
    x = PeriodicSequence(_word_at(words, j).symbols)
    if levels is not None and levels <= 1:
        return x.window(a, b)
    if x.hole_count == 0 or b <= a:
        return x.window(a, b)
    r0 = x.first_rank_at_or_after(a)
    r1 = x.first_rank_at_or_after(b)
    if r1 == r0:
        return x.window(a, b)
    inner = _nested_window(words, j + 1, r0, r1,
                           None if levels is None else levels - 1, depth + 1, cap)
    return fill(x, inner, a, b)


# ---------------------------------------------------------------- systems


class ToeplitzSystem:
    """A lazily evaluable Toeplitz point ``x`` and its periodic structure."""

    kind = "abstract"

    def evaluate(self, i: int):
        raise NotImplementedError

    def window(self, a: int, b: int) -> SequenceWindow:
        return SequenceWindow(a, _join([self.evaluate(i) for i in range(a, b)], ""))

    def periods(self, depth: int) -> list[int]:
        raise NotImplementedError

    def skeleton_sequence(self, level: int) -> PeriodicSequence | None:
        """``S_{p_level}(x)`` when known structurally, else None."""
        return None

    @property
    def alphabet(self) -> tuple:
        raise NotImplementedError

    def scale_primes(self) -> set[int]:
        from sympy import factorint
        return set(factorint(self.periods(1)[0]))

    def spec(self) -> dict:
        raise NotImplementedError


class ConstantWordSystem(ToeplitzSystem):
    """The (p,q)-Toeplitz sequence ``lim T_n(w)``."""

    kind = "pq"

    def __init__(self, w: Union[HoleWord, str], budget: Budget | None = None):
        self.w = w if isinstance(w, HoleWord) else HoleWord.parse(w)
        if not self.w.is_generator:
            raise ValueError(f"{self.w} is not a generator: it needs a hole and "
                             "non-hole first and last letters")
        self.budget = budget or current_budget()
        self._x = PeriodicSequence(self.w.symbols)

    @property
    def p(self):
        return self.w.p

    @property
    def q(self):
        return self.w.q

    @property
    def flagged_noncoprime(self) -> bool:
        return not self.w.coprime

    @property
    def alphabet(self):
        return self.w.letters()

    def evaluate(self, i: int):
        x, cap = self._x, self.budget.max_recursion
        for _ in range(cap):
            c = x.at(i)
            if c != HOLE:
                return c
            i = x.rank(i)
        raise RecursionCap(f"evaluation exceeded {cap} steps")

    def window(self, a: int, b: int) -> SequenceWindow:
        self.budget.check_length(b - a)
        return _nested_window([self.w], 0, a, b, None, cap=self.budget.max_recursion)

    def periods(self, depth: int) -> list[int]:
        return [self.p**n for n in range(1, depth + 1)]

    def skeleton_sequence(self, level: int) -> PeriodicSequence:
        return level_sequence(self.w, level)

    def level_words(self, k: int) -> HoleWord:
        return HoleWord(iterate(self.w, k).symbols)

    def scale_primes(self):
        from sympy import factorint
        return set(factorint(self.p))

    def spec(self) -> dict:
        return {"kind": "pq", "word": self.w.symbols}

    def __repr__(self):
        return f"ConstantWordSystem({self.w.symbols!r})"


class PerLevelSystem(ToeplitzSystem):
    """``W_1 = w_1^oo``, ``W_{n+1} = F_{W_n}(w_{n+1}^oo)``; the last word repeats."""

    kind = "perlevel"

    def __init__(self, words: Sequence[Union[HoleWord, str]], budget: Budget | None = None):
        ws = [w if isinstance(w, HoleWord) else HoleWord.parse(w) for w in words]
        if not ws:
            raise ValueError("at least one word is required")
        if any(w.q == 0 for w in ws):
            raise ValueError("every level word needs a hole")
        if not ws[-1].is_generator:
            raise ValueError("the repeating last word must be a generator")
        self.words = ws
        self.budget = budget or current_budget()

    def word(self, j: int) -> HoleWord:
        """0-based level word."""
        return _word_at(self.words, j)

    def tail(self, j: int) -> "PerLevelSystem":
        """The system built from ``w_{j+1}, w_{j+2}, ...``."""
        if j < len(self.words):
            return PerLevelSystem(self.words[j:], self.budget)
        return PerLevelSystem(self.words[-1:], self.budget)

    @property
    def single_hole(self) -> bool:
        return all(w.q == 1 for w in self.words)

    @property
    def alphabet(self):
        return tuple(sorted({c for w in self.words for c in w.letters()}))

    def evaluate(self, i: int):
        cap = self.budget.max_recursion
        for j in range(cap):
            x = PeriodicSequence(self.word(j).symbols)
            c = x.at(i)
            if c != HOLE:
                return c
            i = x.rank(i)
        raise RecursionCap(f"evaluation exceeded {cap} levels")

    def window(self, a: int, b: int) -> SequenceWindow:
        self.budget.check_length(b - a)
        return _nested_window(self.words, 0, a, b, None, cap=self.budget.max_recursion)

    def periods(self, depth: int) -> list[int]:
        out, acc = [], 1
        for j in range(depth):
            acc *= self.word(j).p
            out.append(acc)
        return out

    def skeleton_sequence(self, level: int) -> PeriodicSequence:
        P = self.periods(level)[-1]
        self.budget.check_length(P)
        return PeriodicSequence(level_window(self.words, 0, P, level).symbols)

    def scale_primes(self):
        from sympy import factorint
        primes = set()
        for j in range(max(len(self.words), 1)):
            primes |= set(factorint(self.word(j).p))
        return primes

    def spec(self) -> dict:
        return {"kind": "perlevel", "words": [w.symbols for w in self.words]}

    def __repr__(self):
        return f"PerLevelSystem({[w.symbols for w in self.words]!r})"


def evaluate(sys: ToeplitzSystem, i: int):
    return sys.evaluate(i)


# ------------------------------------------------------------ periodicity


@dataclass(frozen=True)
class PerSet:
    period: int
    start: int
    stop: int
    coordinates: frozenset
    certification: str  # "certified" or "horizon-K"


def _horizon_per(sys: ToeplitzSystem, p: int, a: int, b: int, K: int) -> set[int]:
    lo, hi = a - K * p, b + K * p
    big = sys.window(lo, hi).symbols
    out = set()
    for i in range(a, b):
        c = big[i - lo]
        if all(big[i - lo + k * p] == c for k in range(-K, K + 1)):
            out.add(i)
    return out


def per_set(sys: ToeplitzSystem, p: int, a: int, b: int, horizon: int = 8) -> PerSet:
    """``Per_p(x)`` restricted to ``[a, b)``.

    Coordinates are accepted when ``x_i = x_{i+kp}`` for ``|k| <= horizon``.
    When ``p`` is a level of the periodic structure the non-hole coordinates of
    the skeleton are periodic by construction; if the horizon test rejects all
    the others the two sets coincide and the result is exact.
    """
    found = _horizon_per(sys, p, a, b, horizon)
    label = f"horizon-{horizon}"
    level = _level_of(sys, p)
    if level is not None:
        sk = sys.skeleton_sequence(level)
        if sk is not None:
            structural = {i for i in range(a, b) if sk.at(i) != HOLE}
            if not structural <= found:
                raise AssertionError("skeleton coordinate failed the periodicity check")
            if structural == found:
                label = "certified"
    return PerSet(p, a, b, frozenset(found), label)


def _level_of(sys: ToeplitzSystem, p: int, max_depth: int = 64) -> int | None:
    try:
        ps = sys.periods(max_depth)
    except (NotImplementedError, IndexError):
        return None
    for n, pn in enumerate(ps, start=1):
        if pn == p:
            return n
        if pn > p:
            break
    return None


def skeleton(sys: ToeplitzSystem, level: int, a: int, b: int, horizon: int = 8) -> SequenceWindow:
    """``S_{p_level}(x)`` on ``[a, b)``."""
    sk = sys.skeleton_sequence(level)
    if sk is not None:
        return sk.window(a, b)
    p = sys.periods(level)[-1]
    ps = per_set(sys, p, a, b, horizon)
    xs = sys.window(a, b).symbols
    return SequenceWindow(a, _join([c if a + j in ps.coordinates else HOLE
                                    for j, c in enumerate(xs)], xs))


@dataclass(frozen=True)
class PeriodCheck:
    period: int
    status: str  # "essential (window-certified)" or "undetermined"
    witness: int | None = None  # a smaller period matching on the window


def _per_on(big, lo, a, b, p, span) -> frozenset:
    """Coordinates of [a,b) whose value repeats with step p throughout the span."""
    out = []
    s0, s1 = span
    for i in range(a, b):
        c = big[i - lo]
        k0 = -((i - s0) // p)
        k1 = (s1 - 1 - i) // p
        if all(big[i - lo + k * p] == c for k in range(k0, k1 + 1)):
            out.append(i)
    return frozenset(out)


def essential_periods(sys: ToeplitzSystem, depth: int) -> list[PeriodCheck]:
    """Check each level of the periodic structure for essentiality.

    Level ``n`` is compared against every ``p < p_n`` on a window of length
    ``2 p_{n+1}``; periodicity is tested across a span three times as wide.
    """
    ps = sys.periods(depth + 1)
    out = []
    for n in range(depth):
        pn, nxt = ps[n], ps[n + 1]
        a, b = -nxt, nxt
        span = (a - 2 * nxt, b + 2 * nxt)
        big = sys.window(*span).symbols
        lo = span[0]
        target = _per_on(big, lo, a, b, pn, span)
        witness = None
        for p in range(1, pn):
            if _per_on(big, lo, a, b, p, span) == target:
                witness = p
                break
        status = "essential (window-certified)" if witness is None else "undetermined"
        out.append(PeriodCheck(pn, status, witness))
    return out


def aperiodicity_check(sys: ToeplitzSystem, horizon: int, length: int | None = None) -> bool:
    """True when no period ``<= horizon`` fits a window of ``x``; not a certificate."""
    length = length or 4 * horizon
    xs = sys.window(-length, length).symbols
    for p in range(1, horizon + 1):
        if all(xs[i] == xs[i + p] for i in range(len(xs) - p)):
            return False
    return True
