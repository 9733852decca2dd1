"""Factor sets, the complexity function and exponent fits.

Two routes to a factor set are kept apart:

* a *structural* enumeration, exact for (p,q)-Toeplitz words with
  ``gcd(p,q) = 1`` and for per-level systems with one hole per word.  It
  uses ``X = U_m sigma^m F_{T_k}(X)``: every length-n factor is a phase of
  the level-k skeleton with a shorter factor written into its holes;
* a sliding scan over a finite window of ``x``, whose window grows by
  doubling.

A window whose length-n count equals the structural count contains every
factor of length <= n, which is what certifies complexity tables.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .config import current_budget
from .holewords import (
    HOLE,
    ConstantWordSystem,
    PerLevelSystem,
    PeriodicSequence,
    SequenceWindow,
    ToeplitzSystem,
    iterate,
)

CERTIFIED = "certified-by-structure"


class CertificationError(RuntimeError):
    pass


@dataclass(frozen=True)
class FactorSet:
    length: int
    words: frozenset
    certification: str
    window_length: int = 0

    def __len__(self):
        return len(self.words)

    def __contains__(self, w):
        return w in self.words

    @property
    def certified(self) -> bool:
        return self.certification == CERTIFIED


# ----------------------------------------------------- structural factors


def supports_structural(sys: ToeplitzSystem) -> bool:
    if isinstance(sys, ConstantWordSystem):
        return sys.w.coprime
    if isinstance(sys, PerLevelSystem):
        return sys.single_hole
    return False


def _segments(pattern) -> list:
    return pattern.split(HOLE)


def _interleave(segs, u) -> str:
    return "".join(itertools.chain.from_iterable(zip(segs, u))) + segs[-1]


def _max_holes(pattern: str, n: int) -> int:
    P = len(pattern)
    ext = pattern * (n // P + 2)
    marks = [1 if c == HOLE else 0 for c in ext]
    acc = sum(marks[:n])
    best = acc
    for m in range(1, P):
        acc += marks[m + n - 1] - marks[m - 1]
        best = max(best, acc)
    return best


class _StructuralLanguage:
    """Memoized exact factor sets of one system (and its tails)."""

    def __init__(self, sys: ToeplitzSystem):
        self.sys = sys
        self.cache: dict[tuple[int, int], frozenset] = {}

    # level patterns -------------------------------------------------
    def _pattern_for(self, j: int, n: int) -> tuple[str, int]:
        """(skeleton pattern, tail index) used to reduce length n at tail j."""
        sys = self.sys
        if isinstance(sys, ConstantWordSystem):
            k = 1
            while True:
                pat = iterate(sys.w, k).symbols
                if _max_holes(pat, n) < n:
                    return pat, 0
                k += 1
                if sys.p**k > max(64 * n, 10**6):
                    # adjacent holes survive every level; the all-hole
                    # pieces are skipped in factors(), so level 1 will do
                    return iterate(sys.w, 1).symbols, 0
        pat = sys.word(j).symbols
        if _max_holes(pat, n) >= n:
            raise CertificationError(f"level word {pat} does not reduce length {n}")
        return pat, self._tail(j + 1)

    def _tail(self, j: int) -> int:
        if isinstance(self.sys, ConstantWordSystem):
            return 0
        return min(j, len(self.sys.words) - 1)

    def _letters(self, j: int) -> frozenset:
        sys = self.sys
        if isinstance(sys, ConstantWordSystem):
            return frozenset(sys.w.letters())
        return frozenset(c for w in sys.words[j:] or sys.words[-1:] for c in w.letters())

    def factors(self, n: int, j: int = 0) -> frozenset:
        j = self._tail(j)
        key = (j, n)
        if key in self.cache:
            return self.cache[key]
        if n == 0:
            out = frozenset([""])
        elif n == 1:
            out = self._letters(j)
        else:
            pat, nxt = self._pattern_for(j, n)
            P = len(pat)
            ext = pat * (n // P + 2)
            words = set()
            for m in range(P):
                piece = ext[m:m + n]
                h = piece.count(HOLE)
                if h == 0:
                    words.add(piece)
                    continue
                if h == n and isinstance(self.sys, ConstantWordSystem):
                    # consecutive holes carry consecutive ranks: a factor of
                    # x again, and every coordinate is eventually a letter
                    continue
                segs = _segments(piece)
                for u in self.factors(h, nxt):
                    words.add(_interleave(segs, u))
            out = frozenset(words)
        self.cache[key] = out
        return out


def structural_factors(sys: ToeplitzSystem, n: int) -> frozenset:
    if not supports_structural(sys):
        raise CertificationError(f"no structural enumeration for {sys!r}")
    lang = sys.__dict__.get("_structural")
    if lang is None:
        lang = sys.__dict__["_structural"] = _StructuralLanguage(sys)
    return lang.factors(n)


# ------------------------------------------------- exact substring counts


def _codes(symbols) -> np.ndarray:
    if isinstance(symbols, str):
        return np.frombuffer(symbols.encode("utf-32-le"), dtype=np.uint32).astype(np.int64)
    table: dict = {}
    return np.array([table.setdefault(s, len(table)) for s in symbols], dtype=np.int64)


def suffix_array(symbols) -> np.ndarray:
    """Prefix-doubling suffix array."""
    codes = _codes(symbols)
    n = len(codes)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    _, rank = np.unique(codes, return_inverse=True)
    rank = rank.astype(np.int64)
    k = 1
    while True:
        second = np.full(n, -1, dtype=np.int64)
        if k < n:
            second[: n - k] = rank[k:]
        sa = np.lexsort((second, rank))
        r, s = rank[sa], second[sa]
        change = np.empty(n, dtype=np.int64)
        change[0] = 0
        change[1:] = (r[1:] != r[:-1]) | (s[1:] != s[:-1])
        new = np.empty(n, dtype=np.int64)
        new[sa] = np.cumsum(change)
        rank = new
        if rank.max() == n - 1 or k >= n:
            return sa
        k *= 2


def lcp_array(symbols, sa: np.ndarray) -> np.ndarray:
    """Kasai: ``lcp[i]`` is the common prefix of suffixes ``sa[i-1]`` and ``sa[i]``."""
    n = len(sa)
    s = symbols
    rank = np.empty(n, dtype=np.int64)
    rank[sa] = np.arange(n)
    lcp = np.zeros(n, dtype=np.int64)
    sa_l = sa.tolist()
    rank_l = rank.tolist()
    h = 0
    for i in range(n):
        r = rank_l[i]
        if r > 0:
            j = sa_l[r - 1]
            while i + h < n and j + h < n and s[i + h] == s[j + h]:
                h += 1
            lcp[r] = h
            if h:
                h -= 1
        else:
            h = 0
    return lcp


def distinct_substring_counts(symbols, n_max: int) -> np.ndarray:
    """``counts[n]`` = number of distinct length-n substrings, ``0 <= n <= n_max``."""
    n = len(symbols)
    counts = np.zeros(n_max + 2, dtype=np.int64)
    if n == 0:
        counts[0] = 1
        return counts[: n_max + 1]
    sa = suffix_array(symbols)
    lcp = lcp_array(symbols, sa)
    lengths = n - sa
    lo = lcp + 1
    hi = np.minimum(lengths, n_max) + 1
    ok = lo < hi
    np.add.at(counts, lo[ok], 1)
    np.add.at(counts, hi[ok], -1)
    counts = np.cumsum(counts)[: n_max + 1]
    counts[0] = 1
    return counts


def _distinct_at(symbols, n: int) -> int:
    if n <= 64 or len(symbols) * n <= 5_000_000:
        return len({symbols[i:i + n] for i in range(len(symbols) - n + 1)})
    return int(distinct_substring_counts(symbols, n)[n])


# ------------------------------------------------------- covering windows


def _start_half_width(sys: ToeplitzSystem, n: int) -> int:
    try:
        ps = sys.periods(64)
    except (NotImplementedError, IndexError):
        return 4 * max(n, 1)
    for k, pk in enumerate(ps):
        if pk >= n and k + 1 < len(ps):
            return max(ps[k + 1], 2 * n)
    return max(4 * n, ps[-1])


def covering_window(sys: ToeplitzSystem, n: int, max_length: int | None = None):
    """A window of ``x`` containing every factor of length ``n`` (hence <= n).

    Returns ``(window, certification)``.  The half-width starts at ``p_{k+1}``
    for the least ``p_k >= n`` and doubles until either the length-n count
    matches the structural count, or (without structure) the count is stable
    across two consecutive doublings.
    """
    budget = current_budget()
    max_length = max_length or budget.mem_bytes
    L = _start_half_width(sys, n)
    target = len(structural_factors(sys, n)) if supports_structural(sys) else None
    history: list[int] = []
    while 2 * L <= max_length:
        S = sys.window(-L, L)
        c = _distinct_at(S.symbols, n)
        if target is not None:
            if c > target:
                raise AssertionError("window holds a word outside the structural language")
            if c == target:
                return S, CERTIFIED
        else:
            history.append(c)
            if len(history) >= 3 and history[-1] == history[-2] == history[-3]:
                return S, f"stabilized-at-window-{2 * L}"
        L *= 2
    raise CertificationError(f"factors of length {n} not certified within {max_length} symbols")


def factors(sys: ToeplitzSystem, n: int) -> FactorSet:
    """All length-n factors of ``x``, scanned from a covering window."""
    if n == 0:
        return FactorSet(0, frozenset([sys.window(0, 0).symbols]), CERTIFIED, 0)
    S, cert = covering_window(sys, n)
    s = S.symbols
    words = frozenset(s[i:i + n] for i in range(len(s) - n + 1))
    if cert == CERTIFIED and words != structural_factors(sys, n):
        raise AssertionError("scan and structural enumeration disagree")
    return FactorSet(n, words, cert, len(s))


# -------------------------------------------------------- complexity table


def complexity_exponent(p: int, q: int) -> float:
    """``log(p/d) / log(p/q)`` with ``d = gcd(p, q)``."""
    d = math.gcd(p, q)
    return math.log(p / d) / math.log(p / q)


@dataclass
class ComplexityTable:
    rows: list[tuple[int, int, str]]
    exponent: float | None = None
    c1: float | None = None
    c2: float | None = None
    fit: tuple[float, float] | None = None
    fit_range: tuple[int, int] | None = None

    def counts(self) -> dict[int, int]:
        return {n: c for n, c, _ in self.rows}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "p_X", "certified"])
        for n, c, cert in self.rows:
            w.writerow([n, c, cert])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ComplexityTable":
        r = csv.reader(io.StringIO(text))
        header = next(r)
        if header != ["n", "p_X", "certified"]:
            raise ValueError(f"unexpected header {header}")
        return cls([(int(n), int(c), cert) for n, c, cert in r])

    def plot_data(self) -> str:
        lines = ["# log_n log_pX"]
        for n, c, _ in self.rows:
            if n >= 1:
                lines.append(f"{math.log(n):.12f} {math.log(c):.12f}")
        return "\n".join(lines) + "\n"


def system_exponent(sys: ToeplitzSystem) -> float | None:
    if isinstance(sys, ConstantWordSystem):
        return complexity_exponent(sys.p, sys.q)
    if isinstance(sys, PerLevelSystem) and sys.single_hole:
        return 1.0
    return None


def complexity_table(sys: ToeplitzSystem, n_max: int, exponent: float | None = None) -> ComplexityTable:
    S, cert = covering_window(sys, n_max)
    counts = distinct_substring_counts(S.symbols, n_max)
    rows = [(n, int(counts[n]), cert) for n in range(1, n_max + 1)]
    for (_, a, _), (_, b, _) in zip(rows, rows[1:]):
        if b < a:
            raise AssertionError("complexity must be nondecreasing")
    table = ComplexityTable(rows)
    table.exponent = exponent if exponent is not None else system_exponent(sys)
    if table.exponent is not None:
        ratios = [c / n**table.exponent for n, c, _ in rows]
        table.c1, table.c2 = min(ratios), max(ratios)
    return table


def fit_exponent(table: ComplexityTable, n_min: int, n_max: int) -> tuple[float, float]:
    """Least-squares slope of ``log p_X(n)`` against ``log n``, and the RMS residual."""
    pts = [(n, c) for n, c, cert in table.rows
           if n_min <= n <= n_max and (cert == CERTIFIED or cert.startswith("stabilized"))]
    if len(pts) < 5:
        raise ValueError(f"need at least 5 certified rows in [{n_min},{n_max}], have {len(pts)}")
    x = np.log([n for n, _ in pts])
    y = np.log([c for _, c in pts])
    slope, icept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + icept)) ** 2)))
    table.fit = (float(slope), resid)
    table.fit_range = (n_min, n_max)
    return float(slope), resid
