import math

import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_factors, naive_x
from toeplitz.holewords import ConstantWordSystem, PerLevelSystem
from toeplitz.language import (
    CERTIFIED,
    CertificationError,
    ComplexityTable,
    complexity_exponent,
    complexity_table,
    covering_window,
    distinct_substring_counts,
    factors,
    fit_exponent,
    structural_factors,
    suffix_array,
)


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="abc", min_size=0, max_size=60), st.integers(0, 20))
def test_substring_counts_match_brute_force(s, n_max):
    counts = distinct_substring_counts(s, n_max)
    for n in range(1, n_max + 1):
        assert counts[n] == len({s[i:i + n] for i in range(len(s) - n + 1)})


@settings(max_examples=100, deadline=None)
@given(st.text(alphabet="ab", min_size=1, max_size=80))
def test_suffix_array_sorts_suffixes(s):
    assert list(suffix_array(s)) == sorted(range(len(s)), key=lambda i: s[i:])


def test_suffix_array_on_tuples():
    s = ((1, "a"), (0, "b"), (1, "a"), (0, "b"))
    assert distinct_substring_counts(s, 3).tolist() == [1, 2, 2, 2]


@pytest.mark.parametrize("w", ["a?b?c", "a?b", "ab?c?d?e", "a??bc"])
@pytest.mark.parametrize("n", [1, 2, 5, 9, 17])
def test_structural_matches_long_scan(w, n):
    sys = ConstantWordSystem(w)
    scan = brute_factors(sys.window(-2**16, 2**16).symbols, n)
    assert scan == brute_factors(naive_x(w, -300, 300), n) | scan
    assert structural_factors(sys, n) == scan


def test_structural_for_single_hole_family():
    sys = PerLevelSystem(["a?b", "a?bb", "a?b"])
    for n in (1, 4, 11):
        assert structural_factors(sys, n) == brute_factors(sys.window(-3000, 3000).symbols, n)


def test_structural_refused_without_support():
    with pytest.raises(CertificationError):
        structural_factors(ConstantWordSystem("ab?c?d"), 3)


def test_factor_examples():
    sys = ConstantWordSystem("a?b?c")
    assert len(factors(sys, 1)) == 3
    assert len(factors(sys, 0)) == 1
    fs = factors(sys, 10)
    assert fs.certified and fs.window_length > 0


def test_covering_window_certification_without_structure():
    S, cert = covering_window(ConstantWordSystem("ab?c?d"), 6)
    assert cert.startswith("stabilized")


@pytest.mark.parametrize("w", ["a?b?c", "a?b", "abc?d?e"])
def test_complexity_monotone_and_submultiplicative(w):
    t = complexity_table(ConstantWordSystem(w), 60)
    c = t.counts()
    assert all(c[n] <= c[n + 1] for n in range(1, 60))
    for m in range(1, 30):
        for n in range(1, 60 - m + 1):
            assert c[m + n] <= c[m] * c[n]
    assert all(cert == CERTIFIED for _, _, cert in t.rows)


def test_complexity_exponents():
    assert complexity_exponent(5, 2) == pytest.approx(math.log(5) / math.log(5 / 2))
    assert complexity_exponent(5, 2) == pytest.approx(1.7565, abs=1e-3)
    assert complexity_exponent(3, 1) == pytest.approx(1.0)
    assert complexity_exponent(9, 3) == pytest.approx(1.0)
    assert complexity_exponent(7, 2) == pytest.approx(1.553, abs=1e-3)


def test_table_bounds_bracket_the_ratio():
    t = complexity_table(ConstantWordSystem("a?b?c"), 120)
    assert 0 < t.c1 <= t.c2
    for n, c, _ in t.rows:
        assert t.c1 - 1e-12 <= c / n**t.exponent <= t.c2 + 1e-12


def test_csv_roundtrip():
    t = complexity_table(ConstantWordSystem("a?b"), 20)
    back = ComplexityTable.from_csv(t.to_csv())
    assert back.rows == t.rows
    with pytest.raises(ValueError):
        ComplexityTable.from_csv("x,y\n1,2\n")


def test_fit_single_hole_is_linear():
    t = complexity_table(PerLevelSystem(["a?b"]), 300)
    slope, _ = fit_exponent(t, 30, 300)
    assert 0.9 <= slope <= 1.1
    c = t.counts()
    assert all(c[3**k] <= 2 * 3**k for k in range(1, 6))


def test_fit_needs_enough_rows():
    t = complexity_table(ConstantWordSystem("a?b"), 10)
    with pytest.raises(ValueError):
        fit_exponent(t, 8, 10)


def test_plot_data_lines():
    t = complexity_table(ConstantWordSystem("a?b"), 5)
    assert t.plot_data().splitlines()[0].startswith("#")
    assert len(t.plot_data().splitlines()) == 6


def test_adjacent_holes_are_certified():
    fs = factors(ConstantWordSystem("a??bc"), 12)
    assert fs.certified
