"""Compiled and fallback kernels must agree with each other and with brute force."""
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from oracles import first_multiple_in_class, oracle_primes
from wheelsieve import kernel
from wheelsieve.segment import FlagWidth, SegmentBitmap
from wheelsieve.wheel import sieve_start

PRIMES = np.array([p for p in oracle_primes(20000) if p >= 5], dtype=np.uint64)


def test_default_backend_is_compiled_when_built():
    if "compiled" in kernel.BACKENDS and not os.environ.get("WHEELSIEVE_BACKEND"):
        assert kernel.default.NAME == "compiled"
    assert kernel.get_backend("python").NAME == "python"
    with pytest.raises(ValueError):
        kernel.get_backend("fortran")


@pytest.mark.parametrize("forced", ["python", "nonsense"])
def test_env_forces_fallback(forced):
    env = dict(os.environ, WHEELSIEVE_BACKEND=forced)
    out = subprocess.run([sys.executable, "-c", "from wheelsieve import kernel; print(kernel.default.NAME)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("seg_start", [0, 6, 30, 48, 14400, 10200, 999_996, 6 * 10**9])
def test_starts_match_reference(backend, seg_start):
    id1, id5 = backend.starts(PRIMES, seg_start)
    for p, a, b in zip(PRIMES.tolist(), id1.tolist(), id5.tolist()):
        lower = max(seg_start, p * p)
        assert 6 * a + 1 == first_multiple_in_class(p, lower, 1)
        assert 6 * b + 5 == first_multiple_in_class(p, lower, 5)


def test_starts_agree_with_pure_function(backend):
    rng = np.random.default_rng(7)
    for seg_start in 6 * rng.integers(1, 10**6, size=40):
        id1, id5 = backend.starts(PRIMES[:300], int(seg_start))
        for p, a, b in zip(PRIMES[:300].tolist(), id1.tolist(), id5.tolist()):
            so = sieve_start(p, int(seg_start))
            assert (a, b) == (so.id_1, so.id_5)


@pytest.mark.parametrize("width", list(FlagWidth))
@pytest.mark.parametrize("lo, wl", [(0, 1000), (6000, 777), (600000, 5), (12000, 1000)])
def test_sieve_and_collect(backend, width, lo, wl):
    seg = SegmentBitmap(lo, wl, width)
    hi = seg.end
    active = PRIMES[PRIMES.astype(object) ** 2 < hi] if hi > 25 else PRIMES[:0]
    backend.sieve(seg.marks_r1, seg.marks_r5, width.code, lo // 6, wl, np.ascontiguousarray(active))
    got = backend.collect(seg.marks_r1, seg.marks_r5, width.code, lo // 6, wl, 2**64 - 1)
    want = [p for p in oracle_primes(hi) if lo <= p < hi and p >= 5]
    assert got.dtype == np.uint64
    assert got.tolist() == want


@pytest.mark.parametrize("width", list(FlagWidth))
def test_collect_respects_limit_and_skips_one(backend, width):
    seg = SegmentBitmap(0, 10, width)
    got = backend.collect(seg.marks_r1, seg.marks_r5, width.code, 0, 10, 40)
    assert got.tolist() == [v for v in range(2, 41) if v % 6 in (1, 5)]


@pytest.mark.parametrize("width", list(FlagWidth))
def test_sieve_touches_only_first_nlen_flags(backend, width):
    seg = SegmentBitmap(600, 64, width)
    primes = PRIMES[: int(np.searchsorted(PRIMES, math.isqrt(seg.end)))]
    backend.sieve(seg.marks_r1, seg.marks_r5, width.code, 100, 20, primes)
    tail = backend.collect(seg.marks_r1, seg.marks_r5, width.code, 100, 64, 2**64 - 1)
    # indices 20.. untouched: every wheel value there still flagged
    assert [v for v in tail.tolist() if v >= 720] == [v for v in range(720, 984) if v % 6 in (1, 5)]


def test_backends_bytewise_identical():
    if len(kernel.BACKENDS) < 2:
        pytest.skip("compiled kernel not built")
    c, py = kernel.get_backend("compiled"), kernel.get_backend("python")
    for width in FlagWidth:
        a = SegmentBitmap(60000, 4099, width)
        b = SegmentBitmap(60000, 4099, width)
        active = PRIMES[:60]
        c.sieve(a.marks_r1, a.marks_r5, width.code, 10000, 4099, active)
        py.sieve(b.marks_r1, b.marks_r5, width.code, 10000, 4099, active)
        assert a.marks_r1.tobytes() == b.marks_r1.tobytes()
        assert a.marks_r5.tobytes() == b.marks_r5.tobytes()


@pytest.mark.parametrize("width", list(FlagWidth))
@pytest.mark.parametrize("p", [7, 11, 13, 101])
def test_prime_never_clears_below_its_square(backend, width, p):
    # sieve with p alone so every cleared flag is attributable to p
    seg = SegmentBitmap(0, 2 * p * p, width)
    backend.sieve(seg.marks_r1, seg.marks_r5, width.code, 0, seg.wheel_len,
                  np.array([p], dtype=np.uint64))
    left = set(backend.collect(seg.marks_r1, seg.marks_r5, width.code, 0, seg.wheel_len,
                               2**64 - 1).tolist())
    wheel = [v for v in range(5, seg.end) if v % 6 in (1, 5)]
    cleared = [v for v in wheel if v not in left]
    assert cleared and min(cleared) == p * p
    assert all(v % p == 0 for v in cleared)
    assert all(v in left for v in wheel if v % p == 0 and v < p * p)


def test_compiled_kernel_releases_gil():
    if "compiled" not in kernel.BACKENDS:
        pytest.skip("compiled kernel not built")
    import threading
    import time

    be = kernel.get_backend("compiled")
    wl = 5 * 10**6
    seg = SegmentBitmap(0, wl, FlagWidth.BYTE)
    primes = np.array([p for p in oracle_primes(math.isqrt(6 * wl)) if p >= 5], dtype=np.uint64)
    done = threading.Event()
    took = []

    def work():
        t0 = time.perf_counter()
        be.sieve(seg.marks_r1, seg.marks_r5, FlagWidth.BYTE.code, 0, wl, primes)
        took.append(time.perf_counter() - t0)
        done.set()

    th = threading.Thread(target=work)
    th.start()
    stamps = [time.perf_counter()]
    while not done.is_set():
        stamps.append(time.perf_counter())
    th.join()
    # a kernel holding the GIL would stall this loop for the whole call
    assert max(np.diff(stamps)) < 0.5 * took[0]
