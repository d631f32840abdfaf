"""Metered shared randomness and four-wise independent sign generation.

A `PublicSeed` is a finite string of public coin flips with a hard budget:
every consumer draws bits through `draw_bits`, which counts them and refuses
to overdraw.  `fourwise_rademacher` turns 4*log2(b) seed bits into b signs
that are exactly 4-wise independent: the bits are read as the coefficients of
a degree-3 polynomial over GF(2^k) (k = log2 b), the polynomial is evaluated
at all b field points, and the lowest-order bit of each evaluation is mapped
0 -> +1, 1 -> -1.  Any 4 evaluations of a uniform degree-3 polynomial at
distinct points are uniform and independent (invertible Vandermonde), so the
sign moments of orders up to 4 over distinct indices vanish exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExhaustedError, DimensionError, ParameterError

__all__ = [
    "PublicSeed",
    "RademacherBlockSigns",
    "fourwise_rademacher",
    "gf_mul",
    "gf_poly_eval",
]


# Condensed exponents of one irreducible polynomial per degree k (1..16);
# e.g. 8: (8, 4, 3, 2, 0) encodes x^8 + x^4 + x^3 + x^2 + 1.
_IRREDUCIBLE_EXPONENTS = {
    1: (1, 0),
    2: (2, 1, 0),
    3: (3, 1, 0),
    4: (4, 1, 0),
    5: (5, 2, 0),
    6: (6, 4, 3, 1, 0),
    7: (7, 1, 0),
    8: (8, 4, 3, 2, 0),
    9: (9, 4, 0),
    10: (10, 6, 5, 3, 2, 1, 0),
    11: (11, 2, 0),
    12: (12, 7, 6, 5, 3, 1, 0),
    13: (13, 4, 3, 1, 0),
    14: (14, 7, 5, 3, 0),
    15: (15, 5, 4, 2, 0),
    16: (16, 5, 3, 2, 0),
}

_IRREDUCIBLE = {k: sum(1 << e for e in exps) for k, exps in _IRREDUCIBLE_EXPONENTS.items()}


def gf_mul(a: int, b: int, k: int) -> int:
    """Carry-less multiply in GF(2^k), reduced by the table polynomial."""
    if k not in _IRREDUCIBLE:
        raise ParameterError(f"field degree must be in 1..16, got {k}")
    poly = _IRREDUCIBLE[k]
    acc = 0
    while b:
        if b & 1:
            acc ^= a
        b >>= 1
        a <<= 1
        if a >> k:
            a ^= poly
    return acc


def gf_poly_eval(coeffs: tuple[int, ...], x: int, k: int) -> int:
    """Horner evaluation of sum_i coeffs[i] * x^i over GF(2^k)."""
    acc = 0
    for c in reversed(coeffs):
        acc = gf_mul(acc, x, k) ^ c
    return acc


@dataclass
class PublicSeed:
    """A fixed budget of public random bits with exact draw accounting."""

    bits: np.ndarray  # uint8 array of 0/1
    consumed: int = 0

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=np.uint8)
        if self.bits.ndim != 1 or not np.all(self.bits <= 1):
            raise ParameterError("seed bits must be a flat 0/1 array")

    @property
    def size(self) -> int:
        return int(self.bits.shape[0])

    @property
    def remaining(self) -> int:
        return self.size - self.consumed

    @classmethod
    def random(cls, s: int, rng: np.random.Generator) -> "PublicSeed":
        if s < 0:
            raise ParameterError(f"seed length must be >= 0, got {s}")
        return cls(bits=rng.integers(0, 2, size=s, dtype=np.uint8))

    @classmethod
    def from_int(cls, value: int, length: int) -> "PublicSeed":
        """Seed whose bit string is `value` written MSB-first in `length` bits.

        Used by the exhaustive enumeration tests to sweep a whole seed space.
        """
        if value < 0 or value >= (1 << length):
            raise ParameterError(f"value {value} does not fit in {length} bits")
        bits = np.array([(value >> (length - 1 - i)) & 1 for i in range(length)],
                        dtype=np.uint8)
        return cls(bits=bits)

    def draw_bits(self, count: int) -> np.ndarray:
        """Consume and return the next `count` bits; overdraw is an error."""
        if count < 0:
            raise ParameterError(f"cannot draw {count} bits")
        if self.consumed + count > self.size:
            raise BudgetExhaustedError(
                f"requested {count} public bits with only {self.remaining} of {self.size} left"
            )
        out = self.bits[self.consumed:self.consumed + count]
        self.consumed += count
        return out


@dataclass
class RademacherBlockSigns:
    """b signs in {-1,+1} plus the exact number of seed bits they cost."""

    signs: np.ndarray
    bits_consumed: int = 0

    def __post_init__(self):
        self.signs = np.asarray(self.signs, dtype=np.int8)


def _bits_to_int(bits: np.ndarray) -> int:
    acc = 0
    for b in bits:
        acc = (acc << 1) | int(b)
    return acc


def fourwise_rademacher(seed: PublicSeed, b: int) -> RademacherBlockSigns:
    """Draw b four-wise independent Rademacher signs from the shared seed.

    b must be a power of two.  b = 1 consumes nothing and returns [+1]; any
    larger b consumes exactly 4 * log2(b) bits (four field coefficients of
    log2(b) bits each, most significant bit first, constant term first).
    """
    if b < 1 or (b & (b - 1)) != 0:
        raise DimensionError(f"sign count must be a positive power of two, got {b}")
    if b == 1:
        return RademacherBlockSigns(signs=np.array([1], dtype=np.int8), bits_consumed=0)
    k = b.bit_length() - 1
    raw = seed.draw_bits(4 * k)
    coeffs = tuple(_bits_to_int(raw[i * k:(i + 1) * k]) for i in range(4))
    evals = [gf_poly_eval(coeffs, x, k) for x in range(b)]
    signs = np.where(np.array(evals) & 1, -1, 1).astype(np.int8)
    return RademacherBlockSigns(signs=signs, bits_consumed=4 * k)
