"""Fixed-length bit strings and the handful of operations the class needs.

Bits are packed into a Python int, most significant bit first, so position 0
is the leftmost character of the textual form and numeric order coincides
with lexicographic order of the text.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator


@dataclass(frozen=True, slots=True)
class BitString:
    value: int
    length: int

    def __post_init__(self):
        if self.length < 0:
            raise ValueError(f"negative length {self.length}")
        if self.value < 0 or self.value >> self.length:
            raise ValueError(f"value {self.value} does not fit in {self.length} bits")

    @classmethod
    def parse(cls, text: str) -> "BitString":
        if any(ch not in "01" for ch in text):
            raise ValueError(f"not a bit string: {text!r}")
        return cls(int(text, 2) if text else 0, len(text))

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitString":
        bits = list(bits)
        value = 0
        for b in bits:
            if b not in (0, 1):
                raise ValueError(f"not a bit: {b!r}")
            value = (value << 1) | b
        return cls(value, len(bits))

    @classmethod
    def zeros(cls, length: int) -> "BitString":
        return cls(0, length)

    @classmethod
    def ones(cls, length: int) -> "BitString":
        return cls((1 << length) - 1, length)

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(f"position {i} out of range for length {self.length}")
        return (self.value >> (self.length - 1 - i)) & 1

    def __iter__(self) -> Iterator[int]:
        for i in range(self.length):
            yield (self.value >> (self.length - 1 - i)) & 1

    def __str__(self) -> str:
        return format(self.value, f"0{self.length}b") if self.length else ""

    def __repr__(self) -> str:
        return f"BitString('{self}')"

    def __xor__(self, other: "BitString") -> "BitString":
        return xor(self, other)

    def count(self, v: int = 1) -> int:
        ones = self.value.bit_count()
        return ones if v else self.length - ones


def position_mask(length: int, i: int) -> int:
    """Packed word with a single 1 at position ``i`` of a ``length``-bit string."""
    return 1 << (length - 1 - i)


def xor(a: BitString, b: BitString) -> BitString:
    if a.length != b.length:
        raise ValueError(f"length mismatch: {a.length} vs {b.length}")
    return BitString(a.value ^ b.value, a.length)


def sigma(a: BitString, v: int) -> tuple[int, ...]:
    """Sorted 0-based positions where ``a`` equals ``v``."""
    if v not in (0, 1):
        raise ValueError(f"not a bit: {v!r}")
    return tuple(i for i, b in enumerate(a) if b == v)


def is_balanced(a: BitString) -> bool:
    return 2 * a.value.bit_count() == a.length


def basis(length: int, i: int) -> BitString:
    if not 0 <= i < length:
        raise IndexError(f"basis index {i} out of range for length {length}")
    return BitString(position_mask(length, i), length)


def flip_at(a: BitString, positions: Iterable[int]) -> BitString:
    value = a.value
    for i in positions:
        if not 0 <= i < a.length:
            raise IndexError(f"position {i} out of range for length {a.length}")
        value ^= position_mask(a.length, i)
    return BitString(value, a.length)


def enumerate_balanced(length: int) -> Iterator[BitString]:
    """Yield every balanced string of ``length`` once, in lexicographic order."""
    if length < 0 or length % 2:
        raise ValueError(f"balanced strings need an even non-negative length, got {length}")
    words = []
    for ones in combinations(range(length), length // 2):
        value = 0
        for i in ones:
            value |= position_mask(length, i)
        words.append(value)
    for value in sorted(words):
        yield BitString(value, length)
