"""Products of Toeplitz systems over pairwise coprime scales, times a finite cycle.

``X_1 x ... x X_d x Z_a`` with the diagonal action (shift on each ``X_j``,
``+1`` on ``Z_a``) is again a minimal Toeplitz system when all the scales use
different primes.  Its automorphism group is the direct sum of the factors'
groups; only the inclusion (coordinatewise maps commute) is checked here, the
splitting of every endomorphism is quoted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from sympy import factorint

from .blocks import BlockConstruction, BlockSpec, BlockSystem
from .holewords import ConstantWordSystem, SequenceWindow, ToeplitzSystem
from .odometer import Scale, first_primes_avoiding
from .pq_toeplitz import WindowMap, extensional_check, shift_map


class CoprimalityError(ValueError):
    pass


class CyclicSystem(ToeplitzSystem):
    """``Z_a`` with ``+1``; the point is ``i -> i mod a``."""

    kind = "cyclic"

    def __init__(self, a: int):
        if a < 1:
            raise ValueError("a must be positive")
        self.a = a

    def evaluate(self, i: int):
        return i % self.a

    def window(self, a: int, b: int) -> SequenceWindow:
        return SequenceWindow(a, tuple(i % self.a for i in range(a, b)))

    def periods(self, depth: int) -> list[int]:
        return [self.a] * depth

    @property
    def alphabet(self):
        return tuple(range(self.a))

    def scale_primes(self) -> set[int]:
        return set(factorint(self.a))

    def spec(self) -> dict:
        return {"kind": "cyclic", "a": self.a}

    def __repr__(self):
        return f"CyclicSystem({self.a})"


def plus_one(a: int) -> WindowMap:
    return WindowMap(0, lambda b, _a=a: (b[0] + 1) % _a, f"+1 mod {a}")


class ProductSystem(ToeplitzSystem):
    kind = "product"

    def __init__(self, components: Sequence[ToeplitzSystem], a: int = 1, report: dict | None = None):
        self.components = list(components)
        self.a = a
        self.factors: list[ToeplitzSystem] = self.components + ([CyclicSystem(a)] if a > 1 else [])
        if not self.factors:
            raise ValueError("empty product")
        self._check_coprime()
        self.report = report or {}

    def _check_coprime(self):
        seen: dict[int, int] = {}
        for j, c in enumerate(self.factors):
            for p in c.scale_primes():
                if p in seen:
                    raise CoprimalityError(
                        f"factors {seen[p]} and {j} share the prime {p}"
                    )
                seen[p] = j

    def evaluate(self, i: int):
        return tuple(c.evaluate(i) for c in self.factors)

    def window(self, a: int, b: int) -> SequenceWindow:
        parts = [c.window(a, b).symbols for c in self.factors]
        return SequenceWindow(a, tuple(zip(*parts)))

    def periods(self, depth: int) -> list[int]:
        cols = [c.periods(depth) for c in self.factors]
        return [math.prod(col) for col in zip(*cols)]

    @property
    def alphabet(self):
        return tuple(c.alphabet for c in self.factors)

    def scale_primes(self) -> set[int]:
        out: set[int] = set()
        for c in self.factors:
            out |= c.scale_primes()
        return out

    def spec(self) -> dict:
        return {"kind": "product", "a": self.a,
                "components": [c.spec() for c in self.components]}

    def __repr__(self):
        return f"ProductSystem({self.components!r}, a={self.a})"


def zero_entropy_word(r: int) -> str:
    """Single-hole generator with scale the powers of ``r``."""
    if r == 2:
        # a? ends in a hole; a?bb has the same odometer Z_(2^n)
        return "a?bb"
    return "a?" + "b" * (r - 2)


def realize_group(d: int, a: int = 1, entropy_mode: str = "zero", primes: Sequence[int] | None = None,
                  block_levels: int = 3) -> ProductSystem:
    """A product system whose automorphism group is ``Z^d + Z_a``."""
    if d < 1:
        raise ValueError("d must be at least 1")
    if a < 1:
        raise ValueError("a must be positive")
    a_primes = sorted(factorint(a))
    if primes is None:
        primes = first_primes_avoiding(d, a_primes)
    primes = list(primes)
    if len(primes) != d or len(set(primes)) != d:
        raise ValueError("need d distinct primes")
    clash = set(primes) & set(a_primes)
    if clash:
        raise CoprimalityError(f"primes {sorted(clash)} divide a = {a}")
    comps: list[ToeplitzSystem] = []
    for r in primes:
        if entropy_mode == "zero":
            comps.append(ConstantWordSystem(zero_entropy_word(r)))
        elif entropy_mode == "positive":
            depth = 1
            while r**depth < 4096:
                depth += 1
            spec = BlockSpec(4, 2, Scale.powers(r, depth), block_levels, "toy")
            comps.append(BlockSystem(BlockConstruction(spec)))
        else:
            raise ValueError(f"unknown entropy mode {entropy_mode!r}")
    group = "Z" if d == 1 else f"Z^{d}"
    if a > 1:
        group += f" + Z_{a}"
    report = {
        "d": d,
        "a": a,
        "a_factorization": {str(p): e for p, e in sorted(factorint(a).items())},
        "primes": primes,
        "entropy_mode": entropy_mode,
        "expected_group": group,
        "generators": [f"shift on factor {j + 1}" for j in range(d)]
        + ([f"+1 on Z_{a}"] if a > 1 else []),
        "splitting": "asserted (automorphisms of a product of disjoint minimal factors "
                     "act coordinatewise); only the inclusion is checked",
    }
    return ProductSystem(comps, a, report)


# ------------------------------------------------------------ checking maps


def tuple_map(maps: Sequence[WindowMap]) -> WindowMap:
    """Coordinatewise map on tuple windows, padded to the largest radius."""
    R = max(m.radius for m in maps)

    def rule(block, maps=maps, R=R):
        out = []
        for j, m in enumerate(maps):
            col = tuple(s[j] for s in block)
            r = m.radius
            sub = col[R - r:R + r + 1]
            if all(isinstance(c, str) for c in sub):
                sub = "".join(sub)
            out.append(m.rule(sub))
        return tuple(out)

    return WindowMap(R, rule, "(" + ", ".join(m.label for m in maps) + ")")


def _columns(sys: ProductSystem, a: int, b: int, offsets) -> SequenceWindow:
    parts = [c.window(a + t, b + t).symbols for c, t in zip(sys.factors, offsets)]
    return SequenceWindow(a, tuple(zip(*parts)))


@dataclass
class CommuteReport:
    coordinatewise: bool
    commutes_with_shift: bool
    commutes_with_partial_shifts: bool
    component_checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (self.coordinatewise and self.commutes_with_shift
                and self.commutes_with_partial_shifts
                and all(c is not False for c in self.component_checks))

    def __bool__(self):
        return self.ok


def product_factor_commutes(phi, sys: ProductSystem, half_width: int | None = None,
                            component_checks: bool = True) -> CommuteReport:
    """Check that ``phi`` acts factor by factor and commutes with the shift.

    ``phi`` is a tuple of per-factor window maps or one window map on tuple
    blocks.  Factors are disjoint, so every combination of independent shifts
    of the factor points is again a point of the product; moving the other
    factors must leave each output column unchanged.
    """
    if isinstance(phi, WindowMap):
        F = phi
        parts = None
    else:
        parts = list(phi)
        if len(parts) != len(sys.factors):
            raise ValueError(f"{len(sys.factors)} factor maps expected")
        F = tuple_map(parts)
    R = F.radius
    N = half_width or max(64, 8 * R + 8)
    nf = len(sys.factors)
    zero = [0] * nf
    base = F.apply(_columns(sys, -N, N, zero))
    coord = True
    for j in range(nf):
        for t in (1, 2, 3, 7):
            offs = [t] * nf
            offs[j] = 0
            moved = F.apply(_columns(sys, -N, N, offs))
            if [s[j] for s in moved.symbols] != [s[j] for s in base.symbols]:
                coord = False
    # product shift: F(sigma z) = sigma F(z)
    shifted = F.apply(_columns(sys, -N, N, [1] * nf))
    lo, hi = base.start + 1, base.stop - 1
    a1 = shifted.restrict(lo - 1, hi - 1)
    b1 = base.shift(1).restrict(lo - 1, hi - 1)
    comm = a1.symbols == b1.symbols
    partial = True
    for j in range(nf):
        offs = [0] * nf
        offs[j] = 1
        moved = F.apply(_columns(sys, -N, N, offs))
        for i in range(base.start + 1, base.stop - 1):
            want = list(base.symbols[i - base.start])
            want[j] = base.symbols[i + 1 - base.start][j]
            if tuple(want) != moved.symbols[i - moved.start]:
                partial = False
                break
    checks = []
    if component_checks and parts is not None:
        for m, c in zip(parts, sys.factors):
            if isinstance(c, ConstantWordSystem) and c.w.coprime:
                lhs = _compose(m, shift_map(1))
                rhs = _compose(shift_map(1), m)
                checks.append(extensional_check(lhs, rhs, c).equal)
            else:
                checks.append(None)
    return CommuteReport(coord, comm, partial, checks)


def _compose(f, g):
    from .pq_toeplitz import compose
    return compose(f, g)


def swap_map(i: int = 0, j: int = 1) -> WindowMap:
    """Exchange two columns; a sliding code that mixes factors."""
    def rule(block, i=i, j=j):
        s = list(block[0])
        s[i], s[j] = s[j], s[i]
        return tuple(s)
    return WindowMap(0, rule, f"swap({i},{j})")


def product_per_check(sys: ProductSystem, level: int, a: int, b: int, horizon: int = 4) -> bool:
    """Coordinates periodic in every factor are periodic for the product of the periods."""
    pers = [c.periods(level)[-1] for c in sys.factors]
    P = math.prod(pers)
    lo, hi = a - horizon * P, b + horizon * P
    cols = [c.window(lo, hi).symbols for c in sys.factors]
    big = sys.window(lo, hi).symbols
    for i in range(a, b):
        each = all(
            all(col[i - lo] == col[i - lo + k * p] for k in range(-horizon * P // p, horizon * P // p + 1))
            for col, p in zip(cols, pers)
        )
        if each and any(big[i - lo] != big[i - lo + k * P] for k in range(-horizon, horizon + 1)):
            return False
    return True
