"""Skeleton phases, hole contents and the automorphisms phi_n of (p,q)-Toeplitz shifts.

For a point ``z`` of the subshift and a level ``n`` the phase ``m`` is the
unique residue with ``S_{p^n}(z) = sigma^m T_n(w)``; the hole contents
``H_n(z)`` satisfy ``F_{T_n(w)}(H_n(z)) = sigma^{-m} z``.  The map

    phi_n(z) = sigma^m F_{T_n(w)}(sigma H_n(z))

keeps the skeleton letters of ``z`` and moves every hole symbol one hole to
the left, i.e. each hole receives the symbol found at the next hole to its
right.  Window maps carry a declared radius; equality of two maps is decided
on a window of ``x`` that provably contains every factor of the relevant
length, which for a minimal subshift is equality on ``X``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .config import Budget, current_budget
from .holewords import (
    HOLE,
    ConstantWordSystem,
    HoleWord,
    InsufficientWindow,
    PeriodicSequence,
    SequenceWindow,
    ToeplitzSystem,
    fill,
    iterate,
)
from .language import (
    CERTIFIED,
    CertificationError,
    _distinct_at,
    covering_window,
)
from .odometer import OdometerElement, Scale, rational_element


class PhaseError(ValueError):
    pass


class PhaseAmbiguous(PhaseError):
    def __init__(self, candidates):
        super().__init__(f"phase not determined by the window; candidates {candidates[:16]}"
                         + (" ..." if len(candidates) > 16 else ""))
        self.candidates = list(candidates)


class PhaseInconsistent(PhaseError):
    pass


class RadiusBudgetExceeded(RuntimeError):
    def __init__(self, level: int, radius: int, cap: int):
        super().__init__(f"level {level}: verification radius {radius} exceeds cap {cap}")
        self.level = level
        self.radius = radius


# ------------------------------------------------------------------ phase


@lru_cache(maxsize=64)
def _skeleton(symbols: str, n: int) -> PeriodicSequence:
    return PeriodicSequence(iterate(HoleWord(symbols), n).symbols)


def _as_word(w) -> HoleWord:
    return w if isinstance(w, HoleWord) else HoleWord.parse(w)


@dataclass(frozen=True)
class PhaseResult:
    level: int
    phase: int
    window_length: int
    unique: bool = True


def _encode(symbols, table: dict) -> np.ndarray:
    return np.array([table.setdefault(c, len(table)) for c in symbols], dtype=np.int32)


def _pattern_codes(pattern: str, table: dict) -> np.ndarray:
    return np.array([-1 if c == HOLE else table.setdefault(c, len(table)) for c in pattern],
                    dtype=np.int32)


def _consistent(wc: np.ndarray, start: int, pc: np.ndarray, cands: np.ndarray) -> np.ndarray:
    P = len(pc)
    L = len(wc)
    if L == 0:
        return cands
    keep = []
    chunk = max(1, 4_000_000 // max(L, 1))
    base = (start + np.arange(L)) % P
    for i in range(0, len(cands), chunk):
        ms = cands[i:i + chunk]
        idx = (base[None, :] + ms[:, None]) % P
        pat = pc[idx]
        ok = ((pat == -1) | (pat == wc[None, :])).all(axis=1)
        keep.append(ms[ok])
    return np.concatenate(keep) if keep else cands[:0]


def consistent_phases(window: SequenceWindow, skeleton: PeriodicSequence) -> list[int]:
    """Every ``m`` with ``window_i = T(i+m)`` at all non-hole positions of ``sigma^m T``."""
    table: dict = {}
    pc = _pattern_codes(skeleton.pattern, table)
    wc = _encode(window.symbols, table)
    P = skeleton.period
    cands = np.arange(P)
    # screen on a prefix, then confirm on the whole window
    pre = min(len(wc), 3 * P + 16)
    cands = _consistent(wc[:pre], window.start, pc, cands)
    if len(cands) and pre < len(wc):
        cands = _consistent(wc, window.start, pc, cands)
    return [int(m) for m in cands]


def phase(window: SequenceWindow, n: int, w) -> PhaseResult:
    w = _as_word(w)
    if window.has_holes():
        raise PhaseError("phase needs a window over the alphabet (no holes)")
    ms = consistent_phases(window, _skeleton(w.symbols, n))
    if not ms:
        raise PhaseInconsistent(f"window is not a factor of any point at level {n}")
    if len(ms) > 1:
        raise PhaseAmbiguous(ms)
    return PhaseResult(n, ms[0], len(window), True)


def hole_contents(window: SequenceWindow, n: int, w, m: int | None = None) -> SequenceWindow:
    """``H_n(z)`` on the rank range the window determines (indexed by rank)."""
    w = _as_word(w)
    if m is None:
        m = phase(window, n, w).phase
    T = _skeleton(w.symbols, n)
    r0 = T.first_rank_at_or_after(window.start + m)
    r1 = T.first_rank_at_or_after(window.stop + m)
    syms = window.symbols
    out = [syms[T.hole_coordinate(r) - m - window.start] for r in range(r0, r1)]
    return SequenceWindow(r0, "".join(out) if isinstance(syms, str) else tuple(out))


def phi_formula(window: SequenceWindow, n: int, w, m: int | None = None) -> SequenceWindow:
    """``sigma^m F_{T_n(w)}(sigma H_n(z))`` on every coordinate the window determines."""
    w = _as_word(w)
    if m is None:
        m = phase(window, n, w).phase
    T = _skeleton(w.symbols, n)
    H = hole_contents(window, n, w, m)
    if len(H) < 2:
        raise InsufficientWindow("window holds fewer than two holes")
    y = fill(T, H.shift(1))
    return y.shift(m)


def phi_pointwise(window: SequenceWindow, n: int, w, m: int | None = None) -> SequenceWindow:
    """phi_n read directly: skeleton letters stay, each hole takes the next hole's symbol."""
    w = _as_word(w)
    if m is None:
        m = phase(window, n, w).phase
    T = _skeleton(w.symbols, n)
    out = []
    syms = window.symbols
    last_hole = max((i for i in range(window.start, window.stop) if T.at(i + m) == HOLE),
                    default=None)
    stop = window.stop if last_hole is None else last_hole
    for i in range(window.start, stop):
        if T.at(i + m) != HOLE:
            out.append(syms[i - window.start])
        else:
            j = T.hole_coordinate(T.rank(i + m) + 1) - m
            out.append(syms[j - window.start])
    return SequenceWindow(window.start, "".join(out))


# ------------------------------------------------------------- window maps


@dataclass(frozen=True, eq=False)
class WindowMap:
    """A sliding block code: ``rule`` sends a ``(2r+1)``-block to a symbol.

    ``batch``, when present, evaluates the same map on a whole window and may
    return any range; :meth:`apply` trims to ``[start+r, stop-r)``.
    """

    radius: int
    rule: Callable
    label: str
    batch: Optional[Callable] = None

    def __call__(self, block):
        if len(block) != 2 * self.radius + 1:
            raise ValueError(f"{self.label} needs blocks of length {2 * self.radius + 1}")
        return self.rule(block)

    def apply(self, z: SequenceWindow) -> SequenceWindow:
        r = self.radius
        lo, hi = z.start + r, z.stop - r
        if hi < lo:
            raise InsufficientWindow(f"{self.label}: window shorter than {2 * r + 1}")
        if self.batch is not None:
            try:
                out = self.batch(z)
                if out.start <= lo and out.stop >= hi:
                    return out.restrict(lo, hi)
            except (PhaseError, InsufficientWindow):
                pass
        s = z.symbols
        outs = [self.rule(s[i - r:i + r + 1]) for i in range(r, len(s) - r)]
        return SequenceWindow(lo, "".join(outs) if isinstance(s, str) else tuple(outs))


def shift_map(k: int) -> WindowMap:
    """``sigma^k``: output at i is the input at i + k."""
    r = abs(k)
    return WindowMap(r, lambda b, _c=r + k: b[_c], f"sigma^{k}",
                     lambda z, _k=k: z.shift(_k))


identity = shift_map(0)


def compose(f: WindowMap, g: WindowMap) -> WindowMap:
    """``f o g``."""
    R = f.radius + g.radius

    def rule(block, f=f, g=g, R=R):
        inner = g.apply(SequenceWindow(-R, block))
        return f.rule(inner.symbols)

    def batch(z, f=f, g=g):
        return f.apply(g.apply(z))

    return WindowMap(R, rule, f"{f.label}*{g.label}", batch)


def power(f: WindowMap, ell: int) -> WindowMap:
    if ell < 0:
        raise ValueError("negative powers need an inverse map")
    if ell == 0:
        return identity
    out = f
    for _ in range(ell - 1):
        out = compose(f, out)
    if ell > 1:
        out = WindowMap(out.radius, out.rule, f"({f.label})^{ell}", out.batch)
    return out


# ---------------------------------------------------- extensional equality


@dataclass(frozen=True)
class ExtensionalResult:
    equal: bool
    factor_length: int
    factors_tested: int
    certification: str
    window_length: int

    def __bool__(self):
        return self.equal


_COVERING: dict = {}


def _window_for(sys: ToeplitzSystem, length: int):
    key = json.dumps(sys.spec(), sort_keys=True, default=str)
    cache = _COVERING.setdefault(key, {})
    for L in sorted(cache):
        if L >= length:
            return cache[L]
    res = covering_window(sys, length)
    cache[length] = res
    return res


def extensional_check(f: WindowMap, g: WindowMap, sys: ToeplitzSystem) -> ExtensionalResult:
    R = max(f.radius, g.radius)
    L = 2 * R + 1
    S, cert = _window_for(sys, L)
    lo, hi = S.start + R, S.stop - R
    fo = f.apply(S).restrict(lo, hi)
    go = g.apply(S).restrict(lo, hi)
    return ExtensionalResult(fo.symbols == go.symbols, L, _distinct_at(S.symbols, L),
                             cert, len(S))


def extensional_equal(f: WindowMap, g: WindowMap, sys: ToeplitzSystem) -> bool:
    return extensional_check(f, g, sys).equal


def shift_powers_matching(f: WindowMap, sys: ToeplitzSystem, ks) -> list[int]:
    """All ``k`` in ``ks`` with ``f = sigma^k`` on X (one application of ``f``)."""
    ks = list(ks)
    R = max([f.radius] + [abs(k) for k in ks])
    S, _ = _window_for(sys, 2 * R + 1)
    lo, hi = S.start + R, S.stop - R
    fo = f.apply(S).restrict(lo, hi).symbols
    out = []
    for k in ks:
        if S.restrict(lo + k, hi + k).symbols == fo:
            out.append(k)
    return out


# ------------------------------------------------------------------ phi_n


@dataclass
class _PhiData:
    level: int
    word: HoleWord
    skeleton: PeriodicSequence
    max_gap: int


def _local_phi(block, data: _PhiData):
    """Phase-based local rule on a block centred at 0; returns (status, symbol)."""
    r = (len(block) - 1) // 2
    T = data.skeleton
    ms = consistent_phases(SequenceWindow(-r, block), T)
    if not ms:
        return "inconsistent", block[r]
    outs = set()
    for m in ms:
        if T.at(m) != HOLE:
            outs.add(block[r])
            continue
        j = T.hole_coordinate(T.rank(m) + 1) - m
        if j > r:
            return "undetermined", block[r]
        outs.add(block[r + j])
    if len(outs) != 1:
        return "ambiguous", block[r]
    return "ok", outs.pop()


def _functional_at(S: str, out: str, offset: int, r: int) -> dict | None:
    """Map each (2r+1)-block of S to phi's output at its centre, or None if not a function.

    ``out[i]`` is the output at S-index ``i + offset``.
    """
    table: dict = {}
    lo = max(r, offset)
    hi = min(len(S) - r, offset + len(out))
    for i in range(lo, hi):
        b = S[i - r:i + r + 1]
        o = out[i - offset]
        prev = table.setdefault(b, o)
        if prev != o:
            return None
    return table


def make_phi(n: int, w, radius: int | None = None, budget: Budget | None = None) -> WindowMap:
    """The automorphism ``phi_n`` as a window map of minimal radius.

    The safe radius ``3 p^n + max_gap`` is validated with the phase-based
    local rule on every factor of that length; the minimal radius is then the
    least ``r`` for which phi's output is a function of the ``(2r+1)``-block,
    found by bisection over a window holding every factor.
    """
    w = _as_word(w)
    if not w.coprime:
        raise ValueError(f"phi_n needs gcd(p,q) = 1, got ({w.p},{w.q})")
    budget = budget or current_budget()
    sys = ConstantWordSystem(w, budget)
    T = _skeleton(w.symbols, n)
    holes = T.holes
    gaps = [b - a for a, b in zip(holes, holes[1:])] + [holes[0] + T.period - holes[-1]]
    data = _PhiData(n, w, T, max(gaps))

    def batch(z, data=data):
        return phi_formula(z, data.level, data.word)

    if radius is None:
        r0 = budget.phase_factor * T.period + data.max_gap
        S, _ = _window_for(sys, 2 * r0 + 1)
        s = S.symbols
        image = phi_formula(S, n, w)
        offset = image.start - S.start
        out = image.symbols
        for b in {s[i:i + 2 * r0 + 1] for i in range(len(s) - 2 * r0)}:
            status, _ = _local_phi(b, data)
            if status != "ok":
                raise AssertionError(f"safe radius {r0} failed ({status})")
        if _functional_at(s, out, offset, r0) is None:
            raise AssertionError("phi formula is not a function of its safe window")
        lo, hi = 0, r0
        while lo < hi:
            mid = (lo + hi) // 2
            if _functional_at(s, out, offset, mid) is not None:
                hi = mid
            else:
                lo = mid + 1
        radius = lo
        table = _functional_at(s, out, offset, radius)
    else:
        table = {}

    def rule(block, table=table, data=data):
        hit = table.get(block if isinstance(block, str) else "".join(block))
        if hit is not None:
            return hit
        return _local_phi(block, data)[1]

    return WindowMap(radius, rule, f"phi_{n}", batch)


def phi_odometer_image(n: int, w, depth: int) -> OdometerElement:
    """``pi(phi_n) = p^n / q^n`` in the odometer ``Z_(p^k)``."""
    w = _as_word(w)
    return rational_element(Scale.powers(w.p, depth), w.p**n, w.q**n)


def bezout_root_coefficients(p: int, q: int, n: int) -> tuple[int, int]:
    """Least ``a >= 0`` and matching ``b`` with ``a p^n = b q^n + 1``."""
    P, Q = p**n, q**n
    if math.gcd(P, Q) != 1:
        raise ValueError("p and q must be coprime")
    a = pow(P, -1, Q) if Q > 1 else 0
    b = (a * P - 1) // Q
    assert a * P == b * Q + 1
    return a, b


def root_of_shift(n: int, w, phi: WindowMap | None = None, budget: Budget | None = None):
    """``psi = phi_n^a o sigma^{-b}``, a ``q^n``-th root of the shift.

    Returns ``(psi, a, b)``.
    """
    w = _as_word(w)
    budget = budget or current_budget()
    a, b = bezout_root_coefficients(w.p, w.q, n)
    if a == 0:
        psi = shift_map(-b)
    else:
        phi = phi or make_phi(n, w, budget=budget)
        psi = compose(power(phi, a), shift_map(-b))
    psi = WindowMap(psi.radius, psi.rule, f"root_{w.q**n}(sigma)", psi.batch)
    need = w.q**n * psi.radius
    if need > budget.max_radius:
        raise RadiusBudgetExceeded(n, need, budget.max_radius)
    return psi, a, b


# ---------------------------------------------------------- certificates


@dataclass
class PhiCertificate:
    word: str
    level: int
    radius: int
    identity_checked: str
    identity_holds: bool
    factors_tested: int
    certification: str
    minimal_power: int | None = None
    commutes_with_shift: bool | None = None

    def to_json(self) -> dict:
        return {
            "word": self.word,
            "level": self.level,
            "radius": self.radius,
            "identity_checked": self.identity_checked,
            "identity_holds": self.identity_holds,
            "factors_tested": self.factors_tested,
            "certification": self.certification,
            "minimal_power": self.minimal_power,
            "commutes_with_shift": self.commutes_with_shift,
        }


def certify_phi(n: int, w, check_minimality: bool = True) -> PhiCertificate:
    """Check ``phi_n^{q^n} = sigma^{p^n}``, commutation with sigma, and that no
    smaller power of ``phi_n`` is a power of sigma."""
    w = _as_word(w)
    sys = ConstantWordSystem(w)
    phi = make_phi(n, w)
    P, Q = w.p**n, w.q**n
    res = extensional_check(power(phi, Q), shift_map(P), sys)
    comm = extensional_equal(compose(phi, shift_map(1)), compose(shift_map(1), phi), sys)
    minimal = None
    if check_minimality:
        minimal = Q
        for ell in range(1, Q):
            bound = ell * P // Q + 1
            if shift_powers_matching(power(phi, ell), sys, range(-bound, bound + 1)):
                minimal = ell
                break
    return PhiCertificate(w.symbols, n, phi.radius, f"phi_{n}^{Q} == sigma^{P}",
                          res.equal, res.factors_tested, res.certification, minimal, comm)
