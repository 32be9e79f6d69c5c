"""Pure-Python/numpy sieving kernels, used when ``_ckernel`` is not built.

Same signatures and results as the compiled module. Start indices are
computed for all primes at once with a vectorised form of the residue table;
clearing is one strided slice assignment per prime and residue.
"""
from __future__ import annotations

import numpy as np

from .wheel import TABLE1

NAME = "python"

BIT = 0
BYTE = 1
WORD4 = 2

# _COEF[pw_row, q] -> (a1, b1, a5, b5); row 0 is p = 1 (mod 6), row 1 is p = 5.
_COEF = np.array(
    [[[*TABLE1[pw, q][0], *TABLE1[pw, q][1]] for q in range(6)] for pw in (1, 5)],
    dtype=np.int64,
)


def starts(primes: np.ndarray, seg_start: int) -> tuple[np.ndarray, np.ndarray]:
    pi = np.asarray(primes, dtype=np.uint64)
    n = len(pi)
    out1 = np.empty(n, dtype=np.uint64)
    out5 = np.empty(n, dtype=np.uint64)
    if n == 0:
        return out1, out5
    seg_start = int(seg_start)
    # p < 2**32 for any prime that can be active, so p*p fits in uint64
    early = np.uint64(seg_start) <= pi * pi

    # p*p path
    if early.any():
        pe = pi[early]
        id1 = (pe * pe) // np.uint64(6)
        bump = np.where(pe % np.uint64(6) == 1, 2 * (pe - np.uint64(1)) // np.uint64(3),
                        (pe - np.uint64(2)) // np.uint64(3))
        out1[early] = id1
        out5[early] = id1 + bump

    # table path
    late = ~early
    if late.any():
        pl = pi[late]
        qv = pl * ((np.uint64(seg_start) - np.uint64(1)) // pl)
        q = (qv % np.uint64(6)).astype(np.intp)
        base = (qv // np.uint64(6)).astype(np.int64)
        row = (pl % np.uint64(6) == 5).astype(np.intp)
        x = (pl // np.uint64(6)).astype(np.int64) + row
        c = _COEF[row, q]
        out1[late] = base + c[:, 0] * x + c[:, 1]
        out5[late] = base + c[:, 2] * x + c[:, 3]
    return out1, out5


def _clear_dense(m1: np.ndarray, m5: np.ndarray, lo_index: int, nlen: int,
                 primes: np.ndarray, seg_start: int) -> None:
    s1, s5 = starts(primes, seg_start)
    v1 = m1[:nlen]
    v5 = m5[:nlen]
    for p, a, b in zip(primes.tolist(), s1.tolist(), s5.tolist()):
        v1[a - lo_index :: p] = 0
        v5[b - lo_index :: p] = 0


def sieve(m1: np.ndarray, m5: np.ndarray, width: int, lo_index: int, nlen: int,
          primes: np.ndarray) -> None:
    lo_index = int(lo_index)
    nlen = int(nlen)
    primes = np.asarray(primes, dtype=np.uint64)
    seg_start = 6 * lo_index
    if width != BIT:
        _clear_dense(m1, m5, lo_index, nlen, primes, seg_start)
        return
    u1 = np.unpackbits(m1, bitorder="little")
    u5 = np.unpackbits(m5, bitorder="little")
    _clear_dense(u1, u5, lo_index, nlen, primes, seg_start)
    m1[:] = np.packbits(u1, bitorder="little")
    m5[:] = np.packbits(u5, bitorder="little")


def collect(m1: np.ndarray, m5: np.ndarray, width: int, lo_index: int, nlen: int,
            limit: int) -> np.ndarray:
    lo_index = int(lo_index)
    nlen = int(nlen)
    if width == BIT:
        f1 = np.unpackbits(m1, bitorder="little")[:nlen]
        f5 = np.unpackbits(m5, bitorder="little")[:nlen]
    else:
        f1 = m1[:nlen]
        f5 = m5[:nlen]
    # interleaving (6k+1, 6k+5) pairs keeps the output ascending
    flags = np.column_stack((f1 != 0, f5 != 0)).ravel()
    pos = np.flatnonzero(flags).astype(np.uint64)
    vals = np.uint64(6) * (np.uint64(lo_index) + pos // np.uint64(2)) + np.where(
        pos % np.uint64(2) == 0, np.uint64(1), np.uint64(5)
    )
    keep = (vals != 1) & (vals <= np.uint64(limit))
    return vals[keep]
