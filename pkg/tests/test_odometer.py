import itertools
import json
import math

import pytest
from hypothesis import given, strategies as st

from toeplitz.odometer import (
    INFINITE_AT_DEPTH,
    OdometerElement,
    Scale,
    ScaleError,
    add,
    element_order_mod_one,
    first_primes_avoiding,
    is_minimal_translation,
    multiplicity,
    rational_element,
    torsion_structure,
)


def chains(limit=64, depth=3):
    """Every divisibility chain of length <= depth with top <= limit."""
    out = []

    def grow(chain):
        out.append(tuple(chain))
        if len(chain) == depth:
            return
        for m in range(2, limit // chain[-1] + 1):
            grow(chain + [chain[-1] * m])

    for p1 in range(1, limit + 1):
        grow([p1])
    return out


def test_scale_rejects_non_divisibility():
    with pytest.raises(ScaleError):
        Scale((2, 5))
    with pytest.raises(ScaleError):
        Scale(())


def test_scale_quotients_and_json_roundtrip():
    s = Scale((2, 6, 12))
    assert s.quotients == (2, 3, 2)
    assert s[1] == 2 and s[3] == 12
    assert Scale.from_json(s.to_json()) == s
    assert json.loads(s.to_json()) == ["2", "6", "12"]


def test_trivial_scale_is_allowed():
    s = Scale((1,))
    assert OdometerElement.one(s).residues == (0,)
    assert torsion_structure(s).cyclic_parts == ()


def test_add_examples():
    s = Scale.powers(2, 4)
    one = OdometerElement.one(s)
    assert (one + one).residues == (0, 2, 2, 2)
    assert one + OdometerElement.zero(s) == one
    s = Scale((2, 6, 12))
    a = OdometerElement(s, (1, 5, 11))
    b = OdometerElement(s, (1, 1, 1))
    assert add(a, b).residues == (0, 0, 0)


def test_add_scale_mismatch():
    a = OdometerElement.one(Scale((2, 4)))
    b = OdometerElement.one(Scale((2, 6)))
    with pytest.raises(ScaleError):
        add(a, b)


def test_incompatible_residues_rejected():
    with pytest.raises(ScaleError):
        OdometerElement(Scale((2, 4)), (1, 2))


@pytest.mark.parametrize("periods", [(2, 4, 8), (2, 6, 12), (3, 6, 24), (1, 4, 12), (2, 6, 18)])
def test_group_operations_preserve_compatibility_exhaustively(periods):
    s = Scale(periods)
    elems = [OdometerElement.from_int(s, k) for k in range(s.periods[-1])]
    for a, b in itertools.product(elems, repeat=2):
        c = a + b
        assert c.residues[-1] == (a.residues[-1] + b.residues[-1]) % s.periods[-1]
        assert (-a + a) == OdometerElement.zero(s)
    for a in elems:
        for k in (-3, 0, 2, 5):
            assert (a * k).residues[-1] == a.residues[-1] * k % s.periods[-1]


def test_minimal_translation_examples():
    assert is_minimal_translation(2, Scale((5, 25, 125)))
    assert is_minimal_translation(1, Scale((2, 6, 12)))
    assert not is_minimal_translation(2, Scale((2, 4, 8)))


def _orbit_full(m, p):
    return len({m * k % p for k in range(p)}) == p


def test_minimality_matches_orbits_for_small_scales():
    for ch in chains(64, 3):
        s = Scale(ch)
        for m in range(1, s.periods[-1] + 1):
            brute = all(_orbit_full(m, p) for p in ch)
            assert is_minimal_translation(m, s) == brute


def test_torsion_examples():
    assert torsion_structure(Scale.powers(2, 6)).cyclic_parts == ()
    assert torsion_structure(Scale.powers(2, 6)).unresolved == (2,)
    t = torsion_structure(Scale.primorial(5))
    assert t.cyclic_parts == ((2, 2), (3, 3), (5, 5))
    assert t.unresolved == (7, 11)
    t = torsion_structure(Scale.powers(2, 6, factor=3))
    assert t.cyclic_parts == ((3, 3),)
    assert t.unresolved == (2,)


@pytest.mark.parametrize("p", [3, 5, 7, 11])
@pytest.mark.parametrize("depth", [2, 3, 6])
def test_torsion_of_p_times_powers_of_two(p, depth):
    t = torsion_structure(Scale.powers(2, depth, factor=p))
    assert t.cyclic_parts == ((p, p),)


def test_multiplicity_examples():
    m = multiplicity(Scale.factorial(6))
    assert (m[2].value, m[3].value, m[5].value) == (4, 2, 1)
    assert not any(m[p].stabilized for p in (2, 3, 5))
    m = multiplicity(Scale.powers(5, 4))
    assert m[5].value == 4 and not m[5].stabilized
    assert m[3].value == 0 and m[3].stabilized
    m = multiplicity(Scale((12, 12, 12)))
    assert (m[2].value, m[2].stabilized, m[3].value, m[3].stabilized) == (2, True, 1, True)
    assert m[2].limit == 2
    assert multiplicity(Scale.powers(5, 4))[5].limit == "unresolved"


def test_multiplicity_report_json_keyed_by_prime():
    data = json.loads(multiplicity(Scale((12, 12, 12))).to_json())
    assert data == {"2": {"value": 2, "stabilized": True}, "3": {"value": 1, "stabilized": True}}


@pytest.mark.parametrize("maker", [Scale.factorial, Scale.primorial, lambda n: Scale.powers(6, n)])
def test_multiplicity_monotone_in_depth(maker):
    full = maker(7)
    prev = {}
    for d in range(1, 8):
        m = multiplicity(full.truncate(d))
        for p, e in m.entries.items():
            assert e.value >= prev.get(p, 0)
            prev[p] = e.value


def test_element_order_examples():
    s = Scale.powers(5, 2)
    g = rational_element(s, 5, 2)
    assert element_order_mod_one(g, 2) == 2
    assert element_order_mod_one(OdometerElement.one(s), 2) == 1
    s4 = Scale.powers(5, 4)
    assert element_order_mod_one(rational_element(s4, 25, 4), 4) == 4
    with pytest.raises(IndexError):
        element_order_mod_one(g, 3)


def test_element_order_brute_force():
    # the first l with l * g landing near an integer, searched directly
    s = Scale.powers(5, 6)
    for n in (1, 2):
        g = rational_element(s, 5**n, 2**n)
        p = s[6]
        bound = math.isqrt(p)
        brute = next(l for l in range(1, p) if min(l * g.residues[-1] % p, p - l * g.residues[-1] % p) <= bound)
        assert element_order_mod_one(g, 6) == brute == 2**n


def test_element_order_can_report_infinite():
    s = Scale.powers(5, 3)
    g = rational_element(s, 1, 2)
    assert element_order_mod_one(g, 3, bound=0, max_order=1) == INFINITE_AT_DEPTH


def test_first_primes_avoiding():
    assert first_primes_avoiding(2, [2, 3]) == [5, 7]
    assert first_primes_avoiding(1, []) == [2]


@given(st.integers(1, 6), st.integers(2, 7), st.integers(-500, 500), st.integers(-500, 500))
def test_addition_matches_integers(depth, base, a, b):
    s = Scale.powers(base, depth)
    x = OdometerElement.from_int(s, a) + OdometerElement.from_int(s, b)
    assert x == OdometerElement.from_int(s, a + b)


@given(st.integers(1, 200), st.integers(1, 4))
def test_minimality_is_gcd(m, depth):
    s = Scale.powers(6, depth)
    assert is_minimal_translation(m, s) == (math.gcd(m, 6) == 1)
