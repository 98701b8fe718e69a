"""Base-4 self-delimiting encoding of positive integers.

An integer ``N`` with binary digits ``b_1 ... b_n`` is written as the base-4
string ``b_1 ... b_n 2 ... 2`` (``n`` twos).  Strings of this form are called
valid.  Every valid string of length ``2n`` has a first half over ``{0, 1}``
and a second half made only of the digit ``2``, so there are ``2**n`` of them.

The decoder accepts any even-length base-4 string.  It reads the first half
as binary-weighted digits, which makes ``decode(encode(N)) == N`` and keeps
``decode(z) <= 2**len(z)`` for arbitrary strings.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

__all__ = [
    "EncodedString",
    "encode",
    "decode",
    "is_valid",
    "valid_strings",
    "strip_padding",
    "is_padded_valid",
    "padded_valid_strings",
    "bit_length",
    "enc",
    "enc_inverse",
]


@dataclass(frozen=True)
class EncodedString:
    """A base-4 digit string with its exact value as a base-4 fraction."""

    digits: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(d not in (0, 1, 2, 3) for d in self.digits):
            raise ValueError(f"digits must lie in 0..3, got {self.digits}")

    @classmethod
    def parse(cls, text: str) -> "EncodedString":
        try:
            return cls(tuple(int(c) for c in text))
        except ValueError as exc:
            raise ValueError(f"not a base-4 string: {text!r}") from exc

    @property
    def text(self) -> str:
        return "".join(str(d) for d in self.digits)

    @property
    def half_length(self) -> int:
        return len(self.digits) // 2

    def __len__(self) -> int:
        return len(self.digits)

    @property
    def phase(self) -> Fraction:
        """The number ``0.y`` read in base 4, as an exact fraction."""
        value = Fraction(0)
        for k, d in enumerate(self.digits, start=1):
            value += Fraction(d, 4**k)
        return value

    def padded(self, length: int) -> "EncodedString":
        """Right-pad with zeros; the base-4 fraction is unchanged."""
        if length < len(self.digits):
            raise ValueError("cannot pad to a shorter length")
        return EncodedString(self.digits + (0,) * (length - len(self.digits)))


def bit_length(n: int) -> int:
    """Number of binary digits of a positive integer."""
    if n < 1:
        raise ValueError(f"expected a positive integer, got {n}")
    return int(n).bit_length()


def encode(n: int) -> EncodedString:
    """Binary digits of ``n`` followed by as many 2s."""
    if isinstance(n, bool) or not isinstance(n, int):
        raise TypeError(f"expected int, got {type(n).__name__}")
    width = bit_length(n)
    binary = tuple(int(c) for c in format(n, "b"))
    return EncodedString(binary + (2,) * width)


def _as_encoded(z: EncodedString | str | Sequence[int]) -> EncodedString:
    if isinstance(z, EncodedString):
        return z
    if isinstance(z, str):
        return EncodedString.parse(z)
    return EncodedString(tuple(int(d) for d in z))


def decode(z: EncodedString | str | Sequence[int]) -> int:
    """Inverse of :func:`encode`, extended to every even-length string.

    Odd-length strings have no defined first half and are rejected rather
    than guessed at.
    """
    enc = _as_encoded(z)
    if len(enc) == 0 or len(enc) % 2:
        raise ValueError(f"decode needs a non-empty even-length string, got length {len(enc)}")
    half = enc.digits[: enc.half_length]
    value = 0
    for d in half:
        value = 2 * value + d
    return value


def is_valid(z: EncodedString | str | Sequence[int], length: int | None = None) -> bool:
    """True when ``z`` equals ``encode(m)`` for some ``m`` (any leading bit allowed).

    Passing ``length`` asserts the digit count; a mismatch raises instead of
    silently answering False.
    """
    enc = _as_encoded(z)
    if length is not None and len(enc) != length:
        raise ValueError(f"string has {len(enc)} digits, expected {length}")
    if len(enc) == 0 or len(enc) % 2:
        return False
    h = enc.half_length
    return all(d in (0, 1) for d in enc.digits[:h]) and all(d == 2 for d in enc.digits[h:])


def valid_strings(length: int) -> Iterator[EncodedString]:
    """All valid strings of the given even length, in lexicographic order."""
    if length < 2 or length % 2:
        raise ValueError(f"valid strings have positive even length, got {length}")
    h = length // 2
    for head in itertools.product((0, 1), repeat=h):
        yield EncodedString(head + (2,) * h)


def strip_padding(z: EncodedString | str | Sequence[int]) -> EncodedString:
    """Drop trailing zeros.  Valid strings end in 2, so this never eats one."""
    enc = _as_encoded(z)
    digits = list(enc.digits)
    while digits and digits[-1] == 0:
        digits.pop()
    return EncodedString(tuple(digits))


def is_padded_valid(z: EncodedString | str | Sequence[int]) -> bool:
    """A valid string followed by zero or more zeros.

    Reading out a phase ``0.y`` on more digits than ``y`` has yields ``y``
    padded with zeros, so this is the acceptance test for extracted strings.
    """
    return is_valid(strip_padding(z))


def padded_valid_strings(length: int) -> Iterator[EncodedString]:
    """Every zero-padded valid string of exactly ``length`` digits."""
    for k in range(2, length + 1, 2):
        for w in valid_strings(k):
            yield w.padded(length)


enc = encode
enc_inverse = decode
