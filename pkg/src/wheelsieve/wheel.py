"""Arithmetic on the mod-6 wheel.

Every prime above 3 is ``6k + 1`` or ``6k + 5``. A wheel coordinate is the
pair ``(k, residue)``; ``k`` is always an absolute index, never relative to a
segment. Callers that need segment-relative positions subtract
``segment_start // 6`` themselves.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

__all__ = [
    "WORD_MAX",
    "NAIVE_SIEVE_CAP",
    "ResidueClass",
    "WheelCoord",
    "StartOffsets",
    "WheelError",
    "NotOnWheelError",
    "WordOverflowError",
    "value_of",
    "coord_of",
    "naive_sieve",
    "greatest_multiple_below",
    "start_offsets",
    "sieve_start",
    "TABLE1",
]

#: Largest value representable in the unsigned 64-bit machine word.
WORD_MAX = 2**64 - 1

#: Default cap on ``naive_sieve`` so the dense array stays reasonable.
NAIVE_SIEVE_CAP = 10**8


class WheelError(ValueError):
    """Bad argument to a wheel operation (domain, alignment, capacity)."""


class NotOnWheelError(WheelError):
    pass


class WordOverflowError(OverflowError):
    """A value would not fit in the 64-bit machine word."""


class ResidueClass(enum.IntEnum):
    R1 = 1
    R5 = 5


@dataclass(frozen=True, order=True)
class WheelCoord:
    index: int
    residue: ResidueClass

    def __post_init__(self) -> None:
        if self.index < 0:
            raise WheelError(f"wheel index must be non-negative, got {self.index}")


@dataclass(frozen=True)
class StartOffsets:
    """First absolute wheel indices at which a prime's multiples are cleared."""

    id_1: int
    id_5: int

    @property
    def values(self) -> tuple[int, int]:
        return 6 * self.id_1 + 1, 6 * self.id_5 + 5

    def relative_to(self, origin: int) -> tuple[int, int]:
        """Indices relative to the wheel position of ``origin`` (a multiple of 6)."""
        base = origin // 6
        return self.id_1 - base, self.id_5 - base


def value_of(coord: WheelCoord) -> int:
    value = 6 * coord.index + int(coord.residue)
    if value > WORD_MAX:
        raise WordOverflowError(f"wheel value {value} exceeds the 64-bit word")
    return value


def coord_of(n: int) -> WheelCoord:
    if n <= 0:
        raise NotOnWheelError(f"{n} is not a positive integer")
    if n > WORD_MAX:
        raise WordOverflowError(f"{n} exceeds the 64-bit word")
    r = n % 6
    if r == 1:
        return WheelCoord(n // 6, ResidueClass.R1)
    if r == 5:
        return WheelCoord(n // 6, ResidueClass.R5)
    raise NotOnWheelError(f"{n} is {r} mod 6, not on the wheel")


def naive_sieve(n: int, cap: int = NAIVE_SIEVE_CAP) -> list[int]:
    """All primes in ``[2, n]`` with the plain dense Sieve of Eratosthenes.

    This is the reference everything else is checked against, so it shares
    no code with the wheel pipeline.
    """
    if n < 2:
        raise WheelError(f"empty range: n={n} < 2")
    if n > cap:
        raise WheelError(f"n={n} exceeds the naive sieve cap {cap}")
    a = bytearray([1]) * (n + 1)
    a[0] = a[1] = 0
    for i in range(2, math.isqrt(n) + 1):
        if a[i]:
            # j = i*i, i*i + i, ..., n
            a[i * i :: i] = bytes(len(range(i * i, n + 1, i)))
    return list(itertools.compress(range(n + 1), a))


def greatest_multiple_below(p: int, m: int) -> int:
    """Largest multiple of ``p`` strictly less than ``m``."""
    if m <= p:
        raise WheelError(f"m={m} must exceed p={p}; start sieving p at p*p instead")
    return p * ((m - 1) // p)


# Increments to the base index floor(Q/6), keyed by (p mod 6, Q mod 6).
# Each entry is ((a1, b1), (a5, b5)) meaning id_1 += a1*X + b1 and
# id_5 += a5*X + b5, where X = R for p = 1 (mod 6) and X = R + 1 for
# p = 5 (mod 6), R = floor(p/6).
TABLE1: dict[tuple[int, int], tuple[tuple[int, int], tuple[int, int]]] = {
    (1, 0): ((1, 0), (5, 0)),
    (1, 1): ((6, 1), (4, 0)),
    (1, 2): ((5, 1), (3, 0)),
    (1, 3): ((4, 1), (2, 0)),
    (1, 4): ((3, 1), (1, 0)),
    (1, 5): ((2, 1), (6, 1)),
    (5, 0): ((5, -1), (1, -1)),  # id_5 += R, i.e. (R+1) - 1
    (5, 1): ((6, -1), (2, -1)),
    (5, 2): ((1, 0), (3, -1)),
    (5, 3): ((2, 0), (4, -1)),
    (5, 4): ((3, 0), (5, -1)),
    (5, 5): ((4, 0), (6, -1)),
}


def _check_prime_arg(p: int) -> None:
    if p < 5 or p % 6 not in (1, 5):
        raise WheelError(f"p={p} must be >= 5 and coprime to 6")


def start_offsets(p: int, segment_start: int) -> StartOffsets:
    """First indices of multiples of ``p`` at or above ``segment_start``.

    Uses the constant-time residue table: with ``Q`` the greatest multiple of
    ``p`` below the segment, ``q = Q mod 6`` and ``R = p // 6``, both indices
    are ``Q // 6`` plus a table increment. Requires ``segment_start > p``.
    """
    _check_prime_arg(p)
    if segment_start % 6:
        raise WheelError(f"segment_start={segment_start} is not a multiple of 6")
    if segment_start < 6 or segment_start <= p:
        raise WheelError(f"segment_start={segment_start} must exceed p={p}")
    q_val = greatest_multiple_below(p, segment_start)
    base = q_val // 6
    pw = p % 6
    x = p // 6 if pw == 1 else p // 6 + 1
    (a1, b1), (a5, b5) = TABLE1[pw, q_val % 6]
    return StartOffsets(base + a1 * x + b1, base + a5 * x + b5)


def sieve_start(p: int, segment_start: int) -> StartOffsets:
    """Where sieving by ``p`` begins in a segment, never below ``p*p``.

    Segments that start at or before ``p*p`` begin at ``p*p`` (always
    1 mod 6) and at ``p*(p+4)`` or ``p*(p+2)`` for the 5 mod 6 class.
    Later segments take the table path.
    """
    _check_prime_arg(p)
    if segment_start % 6:
        raise WheelError(f"segment_start={segment_start} is not a multiple of 6")
    if segment_start <= p * p:
        id_1 = p * p // 6
        id_5 = id_1 + (2 * (p - 1) // 3 if p % 6 == 1 else (p - 2) // 3)
        return StartOffsets(id_1, id_5)
    return start_offsets(p, segment_start)
