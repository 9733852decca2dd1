import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from toeplitz.blocks import (
    BlockConstruction,
    BlockError,
    BlockSpec,
    BlockSystem,
    block_recount,
    check_c1_c2,
    check_trivial_overlap,
    entropy_lower_bound,
    extensible_check,
    f,
    factor_entropy,
    frequencies,
    letter_map_search,
    log_multinomial,
    parse_blocks,
    toeplitz_point,
    toy_spec,
)
from toeplitz.holewords import essential_periods
from toeplitz.odometer import Scale


@pytest.fixture(scope="module")
def toy():
    return BlockConstruction(toy_spec(4, 3))


def test_f_values():
    assert [f(1, k) for k in range(1, 7)] == [math.factorial(k) for k in range(1, 7)]
    assert f(2, 2) == 6
    assert f(3, 2) == 20


@given(st.lists(st.integers(0, 6), min_size=1, max_size=5))
def test_log_multinomial(counts):
    exact = math.factorial(sum(counts))
    for c in counts:
        exact //= math.factorial(c)
    assert log_multinomial(counts) == pytest.approx(math.log(exact), abs=1e-9)


def test_toy_levels(toy):
    assert [lv.period for lv in toy.levels] == [1, 24, 720]
    assert [lv.k for lv in toy.levels] == [4, 8, 16]
    lv2 = toy.level(2)
    assert (lv2.ratio, lv2.d, lv2.d_hat) == (24, 6, 8)
    assert lv2.d_hat + 2 * lv2.d + 4 == 24


def _lex_multiset(items, count):
    """First ``count`` distinct arrangements of ``items`` in lexicographic order."""
    out = []
    for perm in itertools.permutations(sorted(items)):
        if out and perm <= out[-1]:
            continue
        out.append(perm)
        if len(out) == count:
            break
    return out


def test_level_two_rebuilt_independently():
    con = BlockConstruction(toy_spec(4, 2))
    lv = con.level(2)
    # 24 = 2 + 20 + 2; middle uses index 2 eight times and 3, 4 six times each
    middle = [2] * 8 + [3] * 6 + [4] * 6
    # lexicographic order of a multiset: the first arrangements only move the tail
    first = []
    for tail in _lex_multiset(middle[-8:], 8):
        first.append(tuple(middle[:-8]) + tail)
    want = ["ab" + "".join("abcd"[i - 1] for i in mid) + "cd" for mid in first]
    assert list(lv.blocks) == want


def test_c1_c2_and_overlaps(toy):
    for n in (2, 3):
        assert check_c1_c2(toy, n)
        assert check_trivial_overlap(toy, n)
    assert check_trivial_overlap(toy, 1)


def test_overlap_witness_on_mutation(toy):
    blocks = list(toy.level(2).blocks)
    b = blocks[0]
    blocks[-1] = b[1:] + b[:1]
    res = check_trivial_overlap(blocks)
    assert not res.ok and res.witness is not None
    i, j, k, off = res.witness
    assert 0 < off < len(b)
    assert (blocks[j - 1] + blocks[k - 1])[off:off + len(b)] == blocks[i - 1]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.text(alphabet="ab", min_size=4, max_size=4), min_size=1, max_size=5, unique=True))
def test_overlap_against_brute_force(blocks):
    brute = True
    for bj, bk in itertools.product(blocks, repeat=2):
        v = bj + bk
        if any(v[s:s + 4] in blocks for s in range(1, 4)):
            brute = False
    assert bool(check_trivial_overlap(blocks)) == brute


def test_recount_matches_multiplicities(toy):
    rec = block_recount(toy, 2)
    lv3 = toy.level(3)
    for i, counts in rec.items():
        assert counts == {1 + lv3.multiplicity(i)}
    assert block_recount(toy, 1)[1] == {1}


def test_frequencies_are_exact(toy):
    tab = frequencies(toy, 1)
    assert tab.max_deviation == 0
    assert sum(r.empirical for r in tab.rows) == 1
    assert tab.to_json()["max_deviation"] == "0"


def test_frequency_sum_identity(toy):
    for n in (1, 2):
        lv, up = toy.level(n), toy.level(n + 1)
        total = sum(Fraction(1 + up.multiplicity(i), up.period) * lv.period
                    for i in range(1, lv.k + 1))
        assert total == 1


def test_short_frequency_window_rejected(toy):
    with pytest.raises(BlockError):
        frequencies(toy, 1, window_length=10)


def test_point_and_parse(toy):
    x = toeplitz_point(toy, -720, 720)
    assert x.restrict(0, 24).symbols == toy.level(2).blocks[0]
    idx = parse_blocks(x.restrict(-720, 720), toy.level(2))
    assert len(idx) == 60 and idx[29] == 8 and idx[30] == 1
    with pytest.raises(BlockError):
        toeplitz_point(toy, -721, 0)


def test_extensible(toy):
    assert extensible_check(toy, 1)
    assert extensible_check(toy, 2)


def test_entropy_bounds(toy):
    eb = entropy_lower_bound(toy)
    assert eb.block_bound == pytest.approx(math.log(4))
    assert not eb.chain_valid
    assert eb.chain_bound <= eb.chain_partial <= math.log(4)
    prev = 0.0
    for k1 in (4, 6, 8, 16):
        b = entropy_lower_bound(BlockConstruction(toy_spec(k1, 2))).chain_bound
        assert b > prev
        prev = b


def test_factor_entropy_at_least_block_count(toy):
    for n in (1, 2):
        lv = toy.level(n)
        assert factor_entropy(toy, n) >= math.log(lv.k) / lv.period - 1e-12


def test_essential_periods():
    # the period check reads a few periods either side, so build one level more
    checks = essential_periods(BlockSystem(BlockConstruction(toy_spec(4, 4))), 2)
    assert [c.period for c in checks] == [1, 24]
    assert checks[1].status.startswith("essential")


def test_no_nontrivial_letter_map(toy):
    assert letter_map_search(toy) == []


def test_relaxed_mode():
    con = BlockConstruction(toy_spec(4, 3, relaxed_c2=True))
    assert check_c1_c2(con, 2) and check_c1_c2(con, 3)
    assert check_trivial_overlap(con, 3)
    assert all(r.predicted is None for r in frequencies(con, 1).rows)


def test_faithful_validation():
    with pytest.raises(BlockError):
        BlockSpec(18, Fraction(2), Scale.powers(2, 10), 2, "faithful")
    with pytest.raises(BlockError):
        BlockSpec(30, Fraction(1), Scale.powers(2, 10), 2, "faithful")
    with pytest.raises(BlockError):
        BlockSpec(4, 2, Scale.powers(2, 4), 2, "nonsense")
    with pytest.raises(BlockError):
        BlockConstruction(BlockSpec(19, Fraction(2), Scale.powers(2, 8), 2, "faithful"))


def test_faithful_levels_obey_growth():
    spec = BlockSpec(19, Fraction(2), Scale.powers(2, 5000), 3, "faithful")
    con = BlockConstruction(spec)
    lv2 = con.level(2)
    gap = Fraction(1, 4 * 2) - Fraction(1, 19)
    assert lv2.period > 3 * 19 / gap
    assert lv2.k >= 2 * 19
    eb = entropy_lower_bound(con)
    assert eb.chain_valid
    assert eb.chain_bound == pytest.approx(
        math.exp(-2 * math.log(2) * (math.pi**2 / 6 - 1) / 2) * math.log(19))
