import pytest
from hypothesis import given
from hypothesis import strategies as st

from critline.encoding import (
    EncodedString,
    bit_length,
    decode,
    encode,
    is_padded_valid,
    is_valid,
    padded_valid_strings,
    strip_padding,
    valid_strings,
)


def test_small_encodings():
    assert encode(1).text == "12"
    assert encode(5).text == "101222"
    assert encode(13).text == "11012222"
    assert decode("101222") == 5


def test_phase_is_base4_fraction():
    # 0.12 in base 4 is 1/4 + 2/16
    from fractions import Fraction

    assert encode(1).phase == Fraction(3, 8)


@given(st.integers(min_value=1, max_value=2**40))
def test_round_trip(n):
    z = encode(n)
    assert decode(z) == n
    assert len(z) == 2 * bit_length(n)
    assert is_valid(z)


@given(st.integers(min_value=1, max_value=7))
def test_valid_count(half):
    strings = list(valid_strings(2 * half))
    assert len(strings) == 2**half
    assert all(is_valid(s) for s in strings)
    assert len({s.text for s in strings}) == 2**half


@given(st.lists(st.integers(0, 3), min_size=1, max_size=12))
def test_validity_matches_definition(digits):
    z = EncodedString(tuple(digits))
    h = len(digits) // 2
    expected = len(digits) % 2 == 0 and set(digits[:h]) <= {0, 1} and set(digits[h:]) == {2}
    assert is_valid(z) == expected


@given(st.integers(min_value=1, max_value=500), st.integers(min_value=0, max_value=6))
def test_padding_keeps_validity_and_phase(n, extra):
    z = encode(n)
    padded = z.padded(len(z) + extra)
    assert is_padded_valid(padded)
    assert strip_padding(padded) == z
    assert padded.phase == z.phase


def test_padded_enumeration_is_exact():
    for length in range(2, 9):
        got = {s.text for s in padded_valid_strings(length)}
        brute = set()
        import itertools

        for digits in itertools.product(range(4), repeat=length):
            if is_padded_valid(digits):
                brute.add("".join(map(str, digits)))
        assert got == brute


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        EncodedString((4,))
    with pytest.raises(ValueError):
        encode(0)
    with pytest.raises(TypeError):
        encode(True)
    with pytest.raises(ValueError):
        decode("121")
    with pytest.raises(ValueError):
        is_valid("12", length=4)
    with pytest.raises(ValueError):
        list(valid_strings(3))
