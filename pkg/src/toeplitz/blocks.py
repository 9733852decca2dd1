"""Iterated block families with forced prefix/suffix and balanced middles.

Level 1 is the alphabet.  A block of level n is

    B_1 ... B_{k/2}  |  middle  |  B_{k/2+1} ... B_k        (k = k_{n-1})

where the middle is an arrangement of ``M - k`` blocks drawn from
``B_2 .. B_k`` (``M = p_{i_n} / p_{i_{n-1}}``) using index 2 exactly ``d_hat``
times and every other index exactly ``d`` times.  Arrangements are taken in
lexicographic order and the first ``k_n`` are kept.

Two modes:

* ``faithful`` picks each ``p_{i_n}`` by the growth inequality needed for the
  entropy estimate; such levels are astronomically long and stay symbolic
  beyond the memory budget.
* ``toy`` picks the least period that leaves room for every index in the
  middle and for ``2 k_{n-1}`` arrangements.  The combinatorial invariants
  (forced prefix/suffix, exact multiplicities, trivial overlaps, frequencies)
  still hold; the analytic entropy chain does not apply.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from sympy.utilities.iterables import multiset_permutations

from .config import Budget, current_budget
from .holewords import SequenceWindow, ToeplitzSystem, letters
from .odometer import Scale

# z + 1 >= exp(-C|z|) on |z| < 1/2 holds with C = 2 log 2 (concavity of log)
CHAIN_C = 2 * math.log(2)
CHAIN_R = 0.5

MATERIALIZE_CAP = 50_000_000


class BlockError(ValueError):
    pass


def f(d: int, k: int) -> int:
    """Number of ways to split a set of size ``d k`` into ``k`` labelled atoms of size ``d``."""
    return math.factorial(d * k) // math.factorial(d) ** k


def log_multinomial(counts) -> float:
    total = sum(counts)
    return math.lgamma(total + 1) - sum(math.lgamma(c + 1) for c in counts)


@dataclass(frozen=True)
class BlockSpec:
    k1: int
    d0: Fraction
    scale: Scale
    levels: int
    mode: str = "toy"
    relaxed_c2: bool = False
    # optional lower bounds for k_n, one per level starting at level 2
    requested: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "d0", Fraction(self.d0))
        if self.mode not in ("toy", "faithful"):
            raise BlockError(f"unknown mode {self.mode!r}")
        if self.k1 < 2:
            raise BlockError("k1 must be at least 2")
        if self.levels < 1:
            raise BlockError("at least one level")
        if self.mode == "faithful":
            if self.k1 <= 3:
                raise BlockError("faithful mode needs k1 > 3")
            if self.d0 <= 1:
                raise BlockError("faithful mode needs D0 > 1")
            # 2^{n-2} k1 > (n+1)^2 D0 for all n >= 2; the ratio (n+1)^2 / 2^{n-2}
            # is largest at n = 2, so this is k1 > 9 D0
            if not self.k1 > 9 * self.d0:
                raise BlockError(f"k1 = {self.k1} must exceed 9*D0 = {9 * self.d0}")


@dataclass
class BlockLevel:
    n: int
    index: int            # i_n, 1-based position in the scale
    period: int           # p_{i_n}
    k: int                # number of blocks kept
    k_full: Optional[int] = None     # all admissible arrangements (None if too large)
    log_k_full: Optional[float] = None
    ratio: int = 1        # M = p_{i_n} / p_{i_{n-1}}
    d: int = 0
    d_hat: int = 0
    blocks: Optional[tuple[str, ...]] = None
    # block j as a list of level-(n-1) indices (1-based)
    layout: Optional[tuple[tuple[int, ...], ...]] = None

    @property
    def materialized(self) -> bool:
        return self.blocks is not None

    def multiplicity(self, i: int) -> int:
        """``d_{i,n-1}``: how often ``B_{i,n-1}`` fills the middle of a level-n block."""
        if i == 1:
            return 0
        return self.d_hat if i == 2 else self.d


def _prepend_one(scale: Scale) -> Scale:
    if scale.periods[0] == 1:
        return scale
    return Scale((1,) + scale.periods)


class BlockConstruction:
    def __init__(self, spec: BlockSpec, budget: Budget | None = None):
        self.spec = spec
        self.scale = _prepend_one(spec.scale)
        self.budget = budget or current_budget()
        self.levels: list[BlockLevel] = []
        base = letters(spec.k1)
        self.levels.append(BlockLevel(1, 1, 1, spec.k1, spec.k1, math.log(spec.k1),
                                      blocks=tuple(base)))
        for n in range(2, spec.levels + 1):
            self.levels.append(build_level(self, n))

    def level(self, n: int) -> BlockLevel:
        if not 1 <= n <= len(self.levels):
            raise IndexError(f"level {n} not built")
        return self.levels[n - 1]

    @property
    def top(self) -> BlockLevel:
        """Highest materialized level."""
        for lv in reversed(self.levels):
            if lv.materialized:
                return lv
        raise BlockError("nothing materialized")

    def requested(self, n: int) -> int:
        r = self.spec.requested
        return r[n - 2] if n - 2 < len(r) else 0


def _faithful_threshold(p_prev: int, k_prev: int, n: int, d0: Fraction) -> Fraction:
    gap = Fraction(1, 1) / (n * n * d0) - Fraction(1, k_prev)
    if gap <= 0:
        raise BlockError(f"level {n}: (n^2 D0)^-1 - k^-1 is not positive")
    return p_prev * 3 * k_prev / gap


def _counts(M: int, k: int) -> tuple[int, int]:
    d = (M - k) // (k - 1)
    return d, M - k - (k - 2) * d


def _full_count(M: int, k: int, d: int, d_hat: int, relaxed: bool):
    slots = M - k
    if slots > 10**300:
        # beyond float range: only the lower bound (k-1)! >= 2k is used
        return None, None
    if relaxed:
        logv = slots * math.log(k - 1)
        exact = (k - 1) ** slots if slots <= 100_000 else None
        return exact, logv
    counts = [d_hat] + [d] * (k - 2)
    logv = log_multinomial(counts)
    exact = None
    if slots <= 20_000:
        exact = math.factorial(slots) // (math.factorial(d_hat) * math.factorial(d) ** (k - 2))
    return exact, logv


def _short(v: int) -> str:
    t = str(v)
    return t if len(t) <= 12 else f"~10^{len(t) - 1}"


def build_level(con: BlockConstruction, n: int) -> BlockLevel:
    spec = con.spec
    prev = con.level(n - 1)
    k = prev.k
    if k < 2:
        raise BlockError("need at least two blocks")
    need = max(2 * k, con.requested(n))
    ps = con.scale.periods
    chosen = None
    for idx in range(prev.index + 1, len(ps) + 1):
        p = ps[idx - 1]
        M = p // prev.period
        if M < 2 * k - 1:
            continue
        if spec.mode == "faithful":
            if not p > _faithful_threshold(prev.period, k, n, spec.d0):
                continue
        d, d_hat = _counts(M, k)
        exact, logv = _full_count(M, k, d, d_hat, spec.relaxed_c2)
        if exact is not None:
            enough = exact >= need
        elif logv is not None:
            enough = logv > math.log(need)
        else:
            # f(d, k-1) >= (k-1)! and (k-1)! >= 2k once k >= 5
            enough = d >= 1 and k >= 5 and need == 2 * k
        if enough:
            chosen = (idx, p, M, d, d_hat, exact, logv)
            break
    if chosen is None:
        raise BlockError(
            f"level {n}: no period in the scale admits {_short(need)} blocks"
            + (" under the growth inequality" if spec.mode == "faithful" else "")
        )
    idx, p, M, d, d_hat, exact, logv = chosen
    if spec.mode == "faithful":
        if exact is None:
            kn = None
        else:
            kn = max(exact, need)
    else:
        kn = need
    lv = BlockLevel(n, idx, p, kn if kn is not None else -1, exact, logv, M, d, d_hat)
    if kn is None or not prev.materialized or kn * p > min(con.budget.mem_bytes, MATERIALIZE_CAP):
        return lv
    half = k // 2
    head = tuple(range(1, half + 1))
    tail = tuple(range(half + 1, k + 1))
    if spec.relaxed_c2:
        middles = itertools.product(range(2, k + 1), repeat=M - k)
    else:
        middles = multiset_permutations([2] * d_hat + [j for j in range(3, k + 1) for _ in range(d)])
    layout = []
    for mid in itertools.islice(middles, kn):
        layout.append(head + tuple(mid) + tail)
    if len(layout) < kn:
        raise BlockError(f"level {n}: only {len(layout)} arrangements, {kn} needed")
    pb = prev.blocks
    lv.layout = tuple(layout)
    lv.blocks = tuple("".join(pb[i - 1] for i in row) for row in layout)
    return lv


# ------------------------------------------------------------- the point


def toeplitz_point(con: BlockConstruction, a: int, b: int) -> SequenceWindow:
    """``x`` on ``[a, b)``; around 0 it reads ``B_{k_n,n} . B_{1,n}`` at every level."""
    top = con.top
    P = top.period
    if a < -P or b > P:
        raise BlockError(f"[{a},{b}) exceeds the built range [{-P},{P})")
    full = top.blocks[-1] + top.blocks[0]
    for lv in con.levels:
        if not lv.materialized or lv is top:
            continue
        q = lv.period
        if full[P - q:P + q] != lv.blocks[-1] + lv.blocks[0]:
            raise AssertionError(f"level {lv.n} disagrees with level {top.n} around 0")
    return SequenceWindow(a, full[a + P:b + P])


def parse_blocks(window: SequenceWindow, lv: BlockLevel) -> list[int]:
    """Split an aligned window into level blocks; returns 1-based indices."""
    if window.start % lv.period or len(window) % lv.period:
        raise BlockError("window not aligned to the level period")
    lookup = {blk: j + 1 for j, blk in enumerate(lv.blocks)}
    out = []
    s = window.symbols
    for o in range(0, len(s), lv.period):
        j = lookup.get(s[o:o + lv.period])
        if j is None:
            raise AssertionError(f"no level-{lv.n} block at {window.start + o}")
        out.append(j)
    return out


# ----------------------------------------------------------- invariants


@dataclass(frozen=True)
class OverlapResult:
    ok: bool
    witness: Optional[tuple[int, int, int, int]] = None  # (i, j, k, offset)

    def __bool__(self):
        return self.ok


def check_trivial_overlap(blocks, n: int | None = None) -> OverlapResult:
    """Each block occurs in any ``B_j B_k`` only as prefix or suffix.

    ``blocks`` is a list of equal-length words or a built construction (then
    ``n`` selects the level).
    """
    if isinstance(blocks, BlockConstruction):
        blocks = blocks.level(n).blocks
    blocks = list(blocks)
    p = len(blocks[0])
    if p == 1:
        return OverlapResult(len(set(blocks)) == len(blocks))
    index = {}
    for i, b in enumerate(blocks):
        index.setdefault(b, i + 1)
    L0 = min(p, 32)
    heads = sorted({b[:L0] for b in blocks})
    for j, bj in enumerate(blocks):
        for k, bk in enumerate(blocks):
            v = bj + bk
            for h in heads:
                s = v.find(h, 1)
                while 0 < s < p:
                    i = index.get(v[s:s + p])
                    if i is not None:
                        return OverlapResult(False, (i, j + 1, k + 1, s))
                    s = v.find(h, s + 1)
    return OverlapResult(True)


def check_c1_c2(con: BlockConstruction, n: int) -> bool:
    """Letter-level recount of the forced prefix/suffix and the middle multiplicities."""
    lv = con.level(n)
    prev = con.level(n - 1)
    k = prev.k
    half = k // 2
    q = prev.period
    head = "".join(prev.blocks[:half])
    tail = "".join(prev.blocks[half:])
    lookup = {b: i + 1 for i, b in enumerate(prev.blocks)}
    for blk in lv.blocks:
        if len(blk) != lv.period:
            return False
        if not blk.startswith(head) or not blk.endswith(tail):
            return False
        middle = blk[len(head):len(blk) - len(tail)]
        idx = [lookup.get(middle[o:o + q]) for o in range(0, len(middle), q)]
        if None in idx or 1 in idx:
            return False
        if con.spec.relaxed_c2:
            continue
        for i in range(2, k + 1):
            if idx.count(i) != lv.multiplicity(i):
                return False
    return len(set(lv.blocks)) == len(lv.blocks)


def block_recount(con: BlockConstruction, n: int) -> dict[int, set[int]]:
    """For each level-n block i, the set of occurrence counts inside level-(n+1) blocks."""
    lv, up = con.level(n), con.level(n + 1)
    out: dict[int, set[int]] = {}
    for i, b in enumerate(lv.blocks, start=1):
        counts = set()
        for big in up.blocks:
            c, s = 0, big.find(b)
            while s != -1:
                c += 1
                s = big.find(b, s + 1)
            counts.add(c)
        out[i] = counts
    return out


@dataclass
class FrequencyRow:
    block: int
    empirical: Fraction
    predicted: Optional[Fraction]


@dataclass
class FrequencyTable:
    level: int
    window_length: int
    rows: list[FrequencyRow]

    @property
    def max_deviation(self) -> Optional[Fraction]:
        devs = [abs(r.empirical - r.predicted) for r in self.rows if r.predicted is not None]
        return max(devs) if devs else None

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "window_length": self.window_length,
            "max_deviation": str(self.max_deviation),
            "rows": [
                {"block": r.block, "empirical": str(r.empirical),
                 "predicted": None if r.predicted is None else str(r.predicted)}
                for r in self.rows
            ],
        }


def frequencies(con: BlockConstruction, n: int, window_length: int | None = None) -> FrequencyTable:
    """Occurrence frequencies of the level-n blocks in ``x``.

    The window starts at ``-p_top`` (a multiple of every period) so whole
    periods are counted and the agreement with ``(1+d_{i,n})/p_{i_{n+1}}`` is exact.
    """
    lv, up = con.level(n), con.level(n + 1)
    top = con.top
    if window_length is None:
        window_length = (2 * top.period - lv.period) // up.period * up.period
    if window_length < 10 * up.period:
        raise BlockError(f"window {window_length} shorter than 10*p = {10 * up.period}")
    a = -top.period
    if a + window_length + lv.period - 1 > top.period:
        raise BlockError("window exceeds the built range")
    x = toeplitz_point(con, a, a + window_length + lv.period - 1).symbols
    rows = []
    for i, b in enumerate(lv.blocks, start=1):
        c, s = 0, x.find(b)
        while s != -1 and s < window_length:
            c += 1
            s = x.find(b, s + 1)
        pred = None if con.spec.relaxed_c2 else Fraction(1 + up.multiplicity(i), up.period)
        rows.append(FrequencyRow(i, Fraction(c, window_length), pred))
    return FrequencyTable(n, window_length, rows)


def extensible_check(con: BlockConstruction, n: int) -> bool:
    """Every occurrence of ``B_{1,n}`` in the built window sits inside the forced context."""
    lv = con.level(n)
    k = lv.k
    half = k // 2
    before = "".join(lv.blocks[half:])
    after = "".join(lv.blocks[:half])
    top = con.top
    P = top.period
    x = toeplitz_point(con, -P, P).symbols
    b1 = lv.blocks[0]
    s = x.find(b1)
    while s != -1:
        if s >= len(before) and x[s - len(before):s] != before:
            return False
        if s + len(after) <= len(x) and x[s:s + len(after)] != after:
            return False
        s = x.find(b1, s + 1)
    return True


# ---------------------------------------------------------------- entropy


@dataclass
class EntropyBounds:
    depth: int
    block_bound: float         # max_n log k_n / p_{i_n}
    chain_bound: float         # exp(-C sum_{n>=2} 1/(n^2 D0)) log k1 / p_{i_1}
    chain_partial: float       # same with the sum stopped at depth
    per_level: list[float] = field(default_factory=list)
    chain_valid: bool = False  # growth inequalities enforced (faithful mode)

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "block_bound": self.block_bound,
            "chain_bound": self.chain_bound,
            "chain_partial": self.chain_partial,
            "per_level": self.per_level,
            "chain_valid": self.chain_valid,
        }


def entropy_lower_bound(con: BlockConstruction, depth: int | None = None) -> EntropyBounds:
    depth = depth or len(con.levels)
    per = []
    for lv in con.levels[:depth]:
        if lv.k > 0:
            per.append(math.log(lv.k) / lv.period)
        elif lv.log_k_full is not None:
            per.append(lv.log_k_full / lv.period)
    d0 = float(con.spec.d0)
    first = con.level(1)
    base = math.log(first.k) / first.period
    tail_sum = (math.pi**2 / 6 - 1) / d0
    partial = sum(1 / (n * n * d0) for n in range(2, depth + 1))
    return EntropyBounds(
        depth,
        max(per),
        math.exp(-CHAIN_C * tail_sum) * base,
        math.exp(-CHAIN_C * partial) * base,
        per,
        con.spec.mode == "faithful",
    )


def factor_entropy(con: BlockConstruction, n: int) -> float:
    """``log(#distinct length-p_{i_n} factors) / p_{i_n}`` on the built window."""
    lv = con.level(n)
    P = con.top.period
    x = toeplitz_point(con, -P, P).symbols
    p = lv.period
    distinct = {x[i:i + p] for i in range(len(x) - p + 1)}
    return math.log(len(distinct)) / p


# --------------------------------------------------------------- systems


class BlockSystem(ToeplitzSystem):
    kind = "blocks"

    def __init__(self, con: BlockConstruction):
        self.con = con
        top = con.top
        self._P = top.period
        self._x = top.blocks[-1] + top.blocks[0]

    def evaluate(self, i: int):
        if not -self._P <= i < self._P:
            raise BlockError(f"coordinate {i} outside the built range")
        return self._x[i + self._P]

    def window(self, a: int, b: int) -> SequenceWindow:
        return toeplitz_point(self.con, a, b)

    def periods(self, depth: int) -> list[int]:
        if depth > len(self.con.levels):
            raise IndexError(f"only {len(self.con.levels)} levels built")
        return [lv.period for lv in self.con.levels[:depth]]

    @property
    def alphabet(self):
        return tuple(self.con.level(1).blocks)

    def scale_primes(self) -> set[int]:
        from sympy import factorint
        return set(factorint(self.con.scale.periods[-1]))

    def spec(self) -> dict:
        s = self.con.spec
        return {
            "kind": "blocks",
            "k1": s.k1,
            "d0": str(s.d0),
            "scale": [str(p) for p in s.scale.periods],
            "levels": s.levels,
            "mode": s.mode,
            "relaxed_c2": s.relaxed_c2,
        }

    def __repr__(self):
        return f"BlockSystem(k1={self.con.spec.k1}, levels={len(self.con.levels)})"


def letter_map_search(con: BlockConstruction, length: int | None = None) -> list[dict]:
    """Radius-0 letter maps other than the identity that send the built
    language of length ``length`` into itself.

    A heuristic: an empty list means no such map of radius 0 exists on the
    window; it says nothing about larger radii.
    """
    A = con.level(1).blocks
    P = con.top.period
    x = toeplitz_point(con, -P, P).symbols
    length = length or min(len(x), 4 * con.level(min(2, len(con.levels))).period)
    lang = {x[i:i + length] for i in range(len(x) - length + 1)}
    sample = sorted(lang)
    found = []
    for img in itertools.product(A, repeat=len(A)):
        if img == tuple(A):
            continue
        table = str.maketrans(dict(zip(A, img)))
        if all(u.translate(table) in lang for u in sample):
            found.append(dict(zip(A, img)))
    return found


TOY_SCALE = Scale.factorial(8)


def toy_spec(k1: int = 4, levels: int = 3, relaxed_c2: bool = False) -> BlockSpec:
    return BlockSpec(k1, Fraction(2), TOY_SCALE, levels, "toy", relaxed_c2)
