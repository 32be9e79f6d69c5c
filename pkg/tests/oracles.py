"""Independent reference computations used by the tests.

Nothing here touches the wheel pipeline.
"""
from __future__ import annotations

import functools

from wheelsieve.wheel import naive_sieve

# Primes below 100, written out by hand.
PRIMES_BELOW_100 = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47,
    53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
]


def is_prime_trial(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def first_multiple_in_class(p: int, lower: int, residue: int) -> int:
    """Smallest multiple of p that is >= lower and == residue (mod 6), by scanning."""
    v = -(-lower // p) * p
    while v % 6 != residue:
        v += p
    return v


@functools.lru_cache(maxsize=None)
def oracle_primes(n: int) -> tuple[int, ...]:
    return tuple(naive_sieve(n))


def oracle_bytes(n: int) -> bytes:
    import numpy as np

    return np.array(oracle_primes(n), dtype="<u8").tobytes()
