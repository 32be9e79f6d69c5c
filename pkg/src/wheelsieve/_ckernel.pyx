# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sieving kernels. Mirrors ``_pykernel``; all loops run without the GIL."""
import numpy as np

cimport numpy as cnp
from libc.stdint cimport uint8_t, uint32_t, uint64_t

cnp.import_array()

NAME = "compiled"

BIT = 0
BYTE = 1
WORD4 = 2

ctypedef fused flag_t:
    uint8_t
    uint32_t


cdef inline void _start(uint64_t p, uint64_t seg_start,
                        uint64_t* id1, uint64_t* id5) noexcept nogil:
    cdef uint64_t qv, q, x, base
    if seg_start <= p * p:
        id1[0] = (p * p) / 6
        if p % 6 == 1:
            id5[0] = id1[0] + 2 * (p - 1) / 3
        else:
            id5[0] = id1[0] + (p - 2) / 3
        return
    qv = p * ((seg_start - 1) / p)
    q = qv % 6
    base = qv / 6
    if p % 6 == 1:
        x = p / 6
        if q == 0:
            id1[0] = base + x
            id5[0] = base + 5 * x
        elif q == 1:
            id1[0] = base + 6 * x + 1
            id5[0] = base + 4 * x
        elif q == 2:
            id1[0] = base + 5 * x + 1
            id5[0] = base + 3 * x
        elif q == 3:
            id1[0] = base + 4 * x + 1
            id5[0] = base + 2 * x
        elif q == 4:
            id1[0] = base + 3 * x + 1
            id5[0] = base + x
        else:
            id1[0] = base + 2 * x + 1
            id5[0] = base + 6 * x + 1
    else:
        x = p / 6 + 1
        if q == 0:
            id1[0] = base + 5 * x - 1
            id5[0] = base + x - 1
        elif q == 1:
            id1[0] = base + 6 * x - 1
            id5[0] = base + 2 * x - 1
        elif q == 2:
            id1[0] = base + x
            id5[0] = base + 3 * x - 1
        elif q == 3:
            id1[0] = base + 2 * x
            id5[0] = base + 4 * x - 1
        elif q == 4:
            id1[0] = base + 3 * x
            id5[0] = base + 5 * x - 1
        else:
            id1[0] = base + 4 * x
            id5[0] = base + 6 * x - 1


def starts(const uint64_t[::1] primes, uint64_t seg_start):
    """Absolute start indices (id_1, id_5) for each prime, never below p*p."""
    cdef Py_ssize_t n = primes.shape[0], i
    out1 = np.empty(n, dtype=np.uint64)
    out5 = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o1 = out1
    cdef uint64_t[::1] o5 = out5
    with nogil:
        for i in range(n):
            _start(primes[i], seg_start, &o1[i], &o5[i])
    return out1, out5


cdef void _sieve_dense(flag_t[::1] m1, flag_t[::1] m5, uint64_t lo_index,
                       uint64_t nlen, const uint64_t[::1] primes) noexcept nogil:
    cdef Py_ssize_t i
    cdef uint64_t p, id1, id5, k
    cdef uint64_t seg_start = 6 * lo_index
    for i in range(primes.shape[0]):
        p = primes[i]
        _start(p, seg_start, &id1, &id5)
        k = id1 - lo_index
        while k < nlen:
            m1[k] = 0
            k += p
        k = id5 - lo_index
        while k < nlen:
            m5[k] = 0
            k += p


cdef void _sieve_bits(uint8_t[::1] m1, uint8_t[::1] m5, uint64_t lo_index,
                      uint64_t nlen, const uint64_t[::1] primes) noexcept nogil:
    cdef Py_ssize_t i
    cdef uint64_t p, id1, id5, k
    cdef uint64_t seg_start = 6 * lo_index
    for i in range(primes.shape[0]):
        p = primes[i]
        _start(p, seg_start, &id1, &id5)
        k = id1 - lo_index
        while k < nlen:
            m1[k >> 3] &= <uint8_t>~(1 << (k & 7))
            k += p
        k = id5 - lo_index
        while k < nlen:
            m5[k >> 3] &= <uint8_t>~(1 << (k & 7))
            k += p


def sieve(m1, m5, int width, uint64_t lo_index, uint64_t nlen, const uint64_t[::1] primes):
    """Clear multiples of ``primes`` in the first ``nlen`` flags of both arrays."""
    cdef uint8_t[::1] b1, b5
    cdef uint32_t[::1] w1, w5
    if width == WORD4:
        w1 = m1
        w5 = m5
        with nogil:
            _sieve_dense(w1, w5, lo_index, nlen, primes)
    else:
        b1 = m1
        b5 = m5
        if width == BIT:
            with nogil:
                _sieve_bits(b1, b5, lo_index, nlen, primes)
        else:
            with nogil:
                _sieve_dense(b1, b5, lo_index, nlen, primes)


cdef Py_ssize_t _collect_dense(flag_t[::1] m1, flag_t[::1] m5, uint64_t lo_index,
                               uint64_t nlen, uint64_t limit,
                               uint64_t[::1] out) noexcept nogil:
    cdef uint64_t k, v
    cdef Py_ssize_t c = 0
    for k in range(nlen):
        v = 6 * (lo_index + k) + 1
        if v > limit:
            break
        if m1[k] and v != 1:
            out[c] = v
            c += 1
        if v + 4 > limit:
            break
        if m5[k]:
            out[c] = v + 4
            c += 1
    return c


cdef Py_ssize_t _collect_bits(uint8_t[::1] m1, uint8_t[::1] m5, uint64_t lo_index,
                              uint64_t nlen, uint64_t limit,
                              uint64_t[::1] out) noexcept nogil:
    cdef uint64_t k, v
    cdef Py_ssize_t c = 0
    cdef uint8_t bit
    for k in range(nlen):
        v = 6 * (lo_index + k) + 1
        if v > limit:
            break
        bit = <uint8_t>(1 << (k & 7))
        if (m1[k >> 3] & bit) and v != 1:
            out[c] = v
            c += 1
        if v + 4 > limit:
            break
        if m5[k >> 3] & bit:
            out[c] = v + 4
            c += 1
    return c


def collect(m1, m5, int width, uint64_t lo_index, uint64_t nlen, uint64_t limit):
    """Ascending values whose flag is set, skipping 1 and anything above ``limit``."""
    out = np.empty(2 * nlen, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef uint8_t[::1] b1, b5
    cdef uint32_t[::1] w1, w5
    cdef Py_ssize_t c
    if width == WORD4:
        w1 = m1
        w5 = m5
        with nogil:
            c = _collect_dense(w1, w5, lo_index, nlen, limit, o)
    else:
        b1 = m1
        b5 = m5
        if width == BIT:
            with nogil:
                c = _collect_bits(b1, b5, lo_index, nlen, limit, o)
        else:
            with nogil:
                c = _collect_dense(b1, b5, lo_index, nlen, limit, o)
    return out[:c]
