import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import oracle_primes
from wheelsieve.segment import (
    BasePrimeStore,
    FlagWidth,
    IncompleteBaseError,
    bootstrap_base,
    extend_base,
    new_segment,
    primes_unbounded,
    sieve_segment,
)
from wheelsieve.wheel import WheelError, WordOverflowError, naive_sieve


def wheel_primes(lo, hi):
    return [p for p in oracle_primes(max(hi, 2)) if lo <= p < hi and p >= 5]


# -- new_segment ------------------------------------------------------------

def test_new_segment_all_flags_set():
    seg = new_segment(0, 3)
    assert seg.end == 18
    assert [v for v in (1, 5, 7, 11, 13, 17) if seg.get(v)] == [1, 5, 7, 11, 13, 17]


def test_new_segment_paper_group():
    seg = new_segment(12000, 1000)
    assert (seg.segment_start, seg.end) == (12000, 18000)
    assert seg.flag_entries == 2000


def test_new_segment_single_index():
    seg = new_segment(6, 1)
    assert seg.get(7) and seg.get(11)
    with pytest.raises(WheelError):
        seg.get(13)


@pytest.mark.parametrize("start, wl", [(0, 0), (7, 3), (-6, 2)])
def test_new_segment_rejects(start, wl):
    with pytest.raises(WheelError):
        new_segment(start, wl)


def test_new_segment_overflow():
    with pytest.raises(WordOverflowError):
        new_segment((2**64 // 6 - 3) * 6, 10)


@pytest.mark.parametrize(
    "width, nbytes", [(FlagWidth.BIT, 2 * 125), (FlagWidth.BYTE, 2 * 1000), (FlagWidth.WORD4, 2 * 4000)]
)
def test_flag_storage_size(width, nbytes):
    seg = new_segment(0, 1000, width)
    assert seg.nbytes == nbytes
    # flags per value span: 2 per 6 values
    assert seg.flag_entries == (seg.end - seg.segment_start) // 3


@pytest.mark.parametrize("width", list(FlagWidth))
def test_clear_and_get(width):
    seg = new_segment(600, 50, width)
    seg.clear(607)
    assert not seg.get(607) and seg.get(601) and seg.get(605)


# -- sieve_segment ----------------------------------------------------------

def test_sieve_segment_paper_group(backend):
    base = BasePrimeStore([p for p in naive_sieve(131) if p >= 5], frontier=134)
    assert int(base.primes[-1]) == 131
    seg = new_segment(12000, 1000)
    seg_before = new_segment(12000, 1000)
    assert seg_before.get(14443) and seg_before.get(14417)
    sieve_segment(seg, base, backend)
    assert not seg.get(14443) and not seg.get(14417)
    assert 14443 % 13 == 0 and 14417 % 13 == 0
    assert seg.primes(backend=backend).tolist() == wheel_primes(12000, 18000)


def test_sieve_segment_first_segment(backend):
    base = bootstrap_base(6000)
    seg = sieve_segment(new_segment(0, 1000), base, backend)
    assert seg.get(1)  # value 1 is never sieved, only skipped on collection
    assert seg.primes(backend=backend).tolist() == [p for p in naive_sieve(5999) if p >= 5]


def test_sieve_segment_clears_square_of_101(backend):
    base = BasePrimeStore([p for p in naive_sieve(101) if p >= 5], frontier=106)
    seg = new_segment(10200, 10)
    assert seg.segment_start <= 10201 < seg.end
    sieve_segment(seg, base, backend)
    assert not seg.get(10201)
    assert 10201 not in seg.primes(backend=backend).tolist()


def test_sieve_segment_incomplete_base():
    base = bootstrap_base(100)  # frontier 10
    with pytest.raises(IncompleteBaseError):
        sieve_segment(new_segment(114, 10), base)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=20000), st.integers(min_value=1, max_value=3000),
       st.sampled_from(list(FlagWidth)))
def test_segment_oracle_equivalence(m, wl, width):
    lo = 6 * m
    seg = new_segment(lo, wl, width)
    base = bootstrap_base(max(25, seg.end))
    sieve_segment(seg, base)
    assert seg.primes().tolist() == wheel_primes(lo, seg.end)


def test_segments_sieved_in_any_order_agree(backend):
    base = bootstrap_base(60000)
    order = [5, 0, 9, 3, 1, 7, 2, 8, 4, 6]
    flags = {}
    for k in order:
        seg = sieve_segment(new_segment(6000 * k, 1000), base, backend)
        flags[k] = (seg.marks_r1.tobytes(), seg.marks_r5.tobytes())
    for k in range(10):
        seg = sieve_segment(new_segment(6000 * k, 1000), base, backend)
        assert flags[k] == (seg.marks_r1.tobytes(), seg.marks_r5.tobytes())


# -- base store -------------------------------------------------------------

def test_bootstrap_base():
    b = bootstrap_base(10**6)
    want = [p for p in naive_sieve(1000) if p >= 5]
    assert b.primes.tolist() == want
    assert len(b) == len(want) == 166 and int(b.primes[-1]) == 997
    assert bootstrap_base(25).primes.tolist() == [5]
    assert bootstrap_base(100).primes.tolist() == [5, 7]
    with pytest.raises(WheelError):
        bootstrap_base(24)


def test_active_uses_square_rule():
    b = bootstrap_base(10**4)
    assert b.active(25).tolist() == []
    assert b.active(26).tolist() == [5]
    assert b.active(50).tolist() == [5, 7]
    assert b.squares[:2] == [25, 49]


def test_extend_base_31_to_1000(backend):
    b = BasePrimeStore([p for p in naive_sieve(31) if p >= 5], frontier=31)
    before = len(b)
    extend_base(b, 1000, backend)
    want = [p for p in naive_sieve(1000) if p >= 5]
    assert b.primes.tolist() == want
    assert len(b) - before == len(want) - 9 == 157
    assert int(b.primes[-1]) == 997


def test_extend_base_idempotent():
    b = bootstrap_base(10**4)
    snap = (b.primes.tolist(), b.frontier)
    extend_base(b, b.frontier)
    extend_base(b, 50)
    assert (b.primes.tolist(), b.frontier) == snap


def test_extend_base_repeated_growth(backend):
    b = bootstrap_base(100)
    for f in (10**2, 10**4, 10**6):
        extend_base(b, f, backend)
    assert b.frontier == 10**6
    assert b.primes.tolist() == [p for p in oracle_primes(10**6) if p >= 5]


def test_base_store_append_validation():
    b = BasePrimeStore([5, 7], frontier=10)
    with pytest.raises(ValueError):
        b.append(np.array([7, 11], dtype=np.uint64), 20)
    with pytest.raises(ValueError):
        b.append(np.array([11], dtype=np.uint64), 9)
    with pytest.raises(ValueError):
        BasePrimeStore([7, 5], frontier=10)


# -- unbounded stream -------------------------------------------------------

def test_unbounded_first_ten():
    assert list(itertools.islice(primes_unbounded(10), 10)) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


def test_unbounded_first_78498():
    got = list(itertools.islice(primes_unbounded(1000), 78498))
    assert got == list(oracle_primes(10**6))
    assert got[-1] == 999983


@pytest.mark.parametrize("width", list(FlagWidth))
def test_unbounded_segment_length_independent(width):
    a = list(itertools.islice(primes_unbounded(100, width=width), 10**5))
    b = list(itertools.islice(primes_unbounded(10**5), 10**5))
    assert a == b


def test_unbounded_segment_length_one():
    assert list(itertools.islice(primes_unbounded(1), 200)) == list(oracle_primes(1223))


def test_unbounded_overflow_signal():
    got = []
    with pytest.raises(WordOverflowError):
        for p in primes_unbounded(7, word_max=1000):
            got.append(p)
    assert got == list(oracle_primes(1000))


def test_unbounded_rejects_zero_length():
    with pytest.raises(WheelError):
        next(primes_unbounded(0))
