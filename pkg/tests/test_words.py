import pytest
from hypothesis import given, strategies as st

from fractal_martin.words import (
    EMPTY,
    EventuallyPeriodic,
    ExplicitPrefixes,
    InvalidWord,
    enumerate_level,
    enumerate_upto,
    format_word,
    gap,
    parent,
    parse_infinite,
    parse_word,
    shortlex,
)

from conftest import W

words3 = st.lists(st.integers(1, 3), max_size=8).map(bytes)
words12 = st.lists(st.integers(1, 12), max_size=6).map(bytes)


def test_level_counts():
    assert len(enumerate_level(0, 3)) == 1
    assert len(enumerate_level(4, 3)) == 81
    assert len(enumerate_upto(8, 3)) == (3**9 - 1) // 2


def test_enumeration_is_lexicographic():
    level = enumerate_level(3, 3)
    assert level == sorted(level)
    assert level[0] == W("111") and level[-1] == W("333")


def test_parent_of_empty_word_raises():
    with pytest.raises(InvalidWord):
        parent(EMPTY)
    assert parent(W("123")) == W("12")


def test_gap():
    assert gap(W("1"), W("122")) == 2


def test_format_and_parse():
    assert format_word(EMPTY, 3) == "-"
    assert format_word(W("122"), 3) == "122"
    assert format_word(bytes([10, 2]), 12) == "10,2"
    assert parse_word("-", 3) == EMPTY
    assert parse_word("10,2", 12) == bytes([10, 2])


@pytest.mark.parametrize("bad", ["4", "0", "1a", "1,,2"])
def test_parse_rejects_bad_letters(bad):
    with pytest.raises(InvalidWord):
        parse_word(bad, 3)


@given(words3)
def test_format_roundtrip_small_alphabet(w):
    assert parse_word(format_word(w, 3), 3) == w


@given(words12)
def test_format_roundtrip_large_alphabet(w):
    assert parse_word(format_word(w, 12), 12) == w


@given(words3, words3)
def test_shortlex_orders_by_length_first(a, b):
    if len(a) < len(b):
        assert shortlex(a) < shortlex(b)


def test_eventually_periodic_prefixes():
    xi = parse_infinite("1(2)", 3)
    assert xi.prefixes(4) == [W("1"), W("12"), W("122"), W("1222")]
    assert parse_infinite("(12)", 3).prefix(5) == W("12121")
    assert xi.format(3) == "1(2)"


def test_periodic_needs_period():
    with pytest.raises(InvalidWord):
        EventuallyPeriodic(W("1"), EMPTY)
    with pytest.raises(InvalidWord):
        parse_infinite("12", 3)


def test_explicit_prefixes_must_nest():
    xi = ExplicitPrefixes((W("1"), W("12"), W("123")))
    assert xi.prefix(2) == W("12")
    with pytest.raises(InvalidWord):
        ExplicitPrefixes((W("1"), W("21")))


@given(words3, st.integers(1, 3))
def test_parent_undoes_extension(w, a):
    from fractal_martin.words import concat

    assert parent(concat(w, bytes([a]))) == w


def test_levels_hang_off_the_previous_level():
    for n in range(1, 5):
        prev = set(enumerate_level(n - 1, 4))
        lv = enumerate_level(n, 4)
        assert len(set(lv)) == 4**n
        assert all(parent(w) in prev for w in lv)
