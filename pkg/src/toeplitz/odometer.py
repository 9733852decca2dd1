"""Truncated odometers: exact arithmetic, minimality, torsion and multiplicity.

Every statement here is about a finite truncation ``p_1 | p_2 | ... | p_N``.
Limits of p-adic valuations cannot be decided from finite data, so each prime
carries a *stabilized* flag: its valuation was constant over the tail of the
chain (the last ``max(2, ceil(N/2))`` levels).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

from sympy import factorint, prime


class ScaleError(ValueError):
    pass


@dataclass(frozen=True)
class Scale:
    """A divisibility chain ``p_1 | p_2 | ... | p_N``."""

    periods: tuple[int, ...]

    def __post_init__(self):
        periods = tuple(int(p) for p in self.periods)
        object.__setattr__(self, "periods", periods)
        if not periods:
            raise ScaleError("a scale needs at least one period")
        if any(p < 1 for p in periods):
            raise ScaleError(f"periods must be positive: {periods}")
        for a, b in zip(periods, periods[1:]):
            if b % a:
                raise ScaleError(f"{a} does not divide {b}")

    @property
    def depth(self) -> int:
        return len(self.periods)

    @property
    def quotients(self) -> tuple[int, ...]:
        ps = self.periods
        return (ps[0],) + tuple(b // a for a, b in zip(ps, ps[1:]))

    def __getitem__(self, n: int) -> int:
        """1-based access, ``s[n] == p_n``."""
        if not 1 <= n <= self.depth:
            raise IndexError(f"level {n} outside 1..{self.depth}")
        return self.periods[n - 1]

    def truncate(self, depth: int) -> "Scale":
        if not 1 <= depth <= self.depth:
            raise IndexError(f"depth {depth} outside 1..{self.depth}")
        return Scale(self.periods[:depth])

    def primes(self) -> list[int]:
        return sorted(factorint(self.periods[-1]))

    # constructors for the chains used throughout
    @classmethod
    def powers(cls, base: int, depth: int, factor: int = 1) -> "Scale":
        return cls(tuple(factor * base**n for n in range(1, depth + 1)))

    @classmethod
    def primorial(cls, depth: int) -> "Scale":
        out, acc = [], 1
        for n in range(1, depth + 1):
            acc *= prime(n)
            out.append(acc)
        return cls(tuple(out))

    @classmethod
    def factorial(cls, depth: int) -> "Scale":
        return cls(tuple(math.factorial(n) for n in range(1, depth + 1)))

    def to_json(self) -> str:
        return json.dumps([str(p) for p in self.periods])

    @classmethod
    def from_json(cls, text: str) -> "Scale":
        data = json.loads(text)
        if not isinstance(data, list):
            raise ScaleError("scale JSON must be an array")
        return cls(tuple(int(v) for v in data))


@dataclass(frozen=True)
class OdometerElement:
    scale: Scale
    residues: tuple[int, ...]

    def __post_init__(self):
        res = tuple(int(r) for r in self.residues)
        object.__setattr__(self, "residues", res)
        if len(res) != self.scale.depth:
            raise ScaleError("one residue per level is required")
        for r, p in zip(res, self.scale.periods):
            if not 0 <= r < p:
                raise ScaleError(f"residue {r} not reduced mod {p}")
        for n in range(len(res) - 1):
            if res[n + 1] % self.scale.periods[n] != res[n]:
                raise ScaleError(f"incompatible residues at level {n + 1}")

    @classmethod
    def from_int(cls, scale: Scale, k: int) -> "OdometerElement":
        return cls(scale, tuple(k % p for p in scale.periods))

    @classmethod
    def zero(cls, scale: Scale) -> "OdometerElement":
        return cls.from_int(scale, 0)

    @classmethod
    def one(cls, scale: Scale) -> "OdometerElement":
        return cls.from_int(scale, 1)

    def _same(self, other: "OdometerElement"):
        if self.scale != other.scale:
            raise ScaleError("elements live in different odometers")

    def __add__(self, other: "OdometerElement") -> "OdometerElement":
        return add(self, other)

    def __neg__(self) -> "OdometerElement":
        return OdometerElement(
            self.scale, tuple(-r % p for r, p in zip(self.residues, self.scale.periods))
        )

    def __sub__(self, other: "OdometerElement") -> "OdometerElement":
        return self + (-other)

    def __mul__(self, k: int) -> "OdometerElement":
        return OdometerElement(
            self.scale, tuple(k * r % p for r, p in zip(self.residues, self.scale.periods))
        )

    __rmul__ = __mul__


def add(a: OdometerElement, b: OdometerElement) -> OdometerElement:
    a._same(b)
    return OdometerElement(
        a.scale,
        tuple((x + y) % p for x, y, p in zip(a.residues, b.residues, a.scale.periods)),
    )


def _orbit_is_full(m: int, p: int) -> bool:
    seen, x = 0, 0
    while True:
        x = (x + m) % p
        seen += 1
        if x == 0:
            return seen == p


def is_minimal_translation(m: int, s: Scale, orbit_check_limit: int = 1 << 20) -> bool:
    """Whether ``+m`` acts minimally on the truncated odometer.

    The gcd criterion is cross-checked against explicit orbits of 0 at every
    level small enough to walk.
    """
    by_gcd = math.gcd(m, s.periods[-1]) == 1
    for p in s.periods:
        if p > orbit_check_limit:
            continue
        if _orbit_is_full(m, p) != (math.gcd(m, p) == 1):
            raise AssertionError(f"orbit and gcd disagree for m={m}, p={p}")
    return by_gcd


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0")
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


@dataclass(frozen=True)
class MultiplicityEntry:
    value: int
    stabilized: bool

    @property
    def limit(self):
        """The certified limit, or the string ``"unresolved"``."""
        return self.value if self.stabilized else "unresolved"


@dataclass(frozen=True)
class MultiplicityReport:
    depth: int
    entries: dict[int, MultiplicityEntry] = field(default_factory=dict)

    def __getitem__(self, p: int) -> MultiplicityEntry:
        # primes never dividing the chain have valuation 0 forever
        return self.entries.get(p, MultiplicityEntry(0, True))

    def to_json(self) -> str:
        return json.dumps(
            {str(p): {"value": e.value, "stabilized": e.stabilized}
             for p, e in sorted(self.entries.items())},
            sort_keys=True,
        )


def _tail(depth: int) -> int:
    return min(depth, max(2, -(-depth // 2)))


def multiplicity(s: Scale) -> MultiplicityReport:
    tail = s.periods[-_tail(s.depth):]
    entries = {}
    for p in sorted(factorint(s.periods[-1])):
        vals = {valuation(x, p) for x in tail}
        entries[p] = MultiplicityEntry(valuation(s.periods[-1], p), len(vals) == 1)
    return MultiplicityReport(s.depth, entries)


@dataclass(frozen=True)
class TorsionReport:
    # (prime, order of the cyclic p-part)
    cyclic_parts: tuple[tuple[int, int], ...]
    unresolved: tuple[int, ...]

    @property
    def order(self) -> int:
        return math.prod(o for _, o in self.cyclic_parts)

    def __iter__(self):
        return iter(self.cyclic_parts)


def torsion_structure(s: Scale) -> TorsionReport:
    report = multiplicity(s)
    parts, unresolved = [], []
    for p, e in sorted(report.entries.items()):
        if not e.stabilized:
            unresolved.append(p)
        elif e.value > 0:
            parts.append((p, p**e.value))
    return TorsionReport(tuple(parts), tuple(unresolved))


INFINITE_AT_DEPTH = "infinite at this depth"


def element_order_mod_one(
    g: OdometerElement,
    depth: int,
    bound: int | None = None,
    max_order: int | None = None,
):
    """Least l > 0 such that ``l*g`` is, at level ``depth``, an integer multiple
    ``r*1`` with a small representative ``|r| <= bound``.

    At a single finite level every residue is some ``r*1``; what separates an
    integer from a genuine odometer element is the size of its centred
    representative.  ``bound`` defaults to ``isqrt(p_depth)``.
    """
    if not 1 <= depth <= g.scale.depth:
        raise IndexError(f"depth {depth} outside 1..{g.scale.depth}")
    p = g.scale[depth]
    x = g.residues[depth - 1]
    if bound is None:
        bound = math.isqrt(p)
    if max_order is None:
        max_order = p
    for ell in range(1, max_order + 1):
        r = ell * x % p
        if r > p // 2:
            r -= p
        if abs(r) <= bound:
            return ell
    return INFINITE_AT_DEPTH


def rational_element(s: Scale, num: int, den: int) -> OdometerElement:
    """The element ``num/den``; ``den`` must be a unit at every level."""
    res = []
    for p in s.periods:
        if math.gcd(den, p) != 1:
            raise ScaleError(f"{den} is not invertible modulo {p}")
        res.append(num * pow(den, -1, p) % p)
    return OdometerElement(s, tuple(res))


def first_primes_avoiding(count: int, avoid: Iterable[int]) -> list[int]:
    avoid = set(avoid)
    out, i = [], 1
    while len(out) < count:
        r = prime(i)
        if r not in avoid:
            out.append(r)
        i += 1
    return out
