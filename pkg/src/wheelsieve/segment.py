"""Single-threaded segmented and incremental sieving on the mod-6 wheel."""
from __future__ import annotations

import enum
import math
from collections.abc import Iterator
from types import ModuleType

import numpy as np

from . import kernel
from .wheel import WORD_MAX, WheelError, WordOverflowError, coord_of, naive_sieve

__all__ = [
    "FlagWidth",
    "SegmentBitmap",
    "BasePrimeStore",
    "IncompleteBaseError",
    "new_segment",
    "sieve_segment",
    "bootstrap_base",
    "extend_base",
    "primes_unbounded",
]

# Upper bound on one extension segment, in wheel indices.
_EXTEND_CHUNK = 1 << 18


class IncompleteBaseError(RuntimeError):
    """The base store does not reach the square root of the segment end."""


class FlagWidth(str, enum.Enum):
    BIT = "bit"
    BYTE = "byte"
    WORD4 = "word4"

    @property
    def code(self) -> int:
        return _WIDTH_CODES[self]

    @property
    def dtype(self) -> type:
        return np.uint32 if self is FlagWidth.WORD4 else np.uint8

    def array_bytes(self, wheel_len: int) -> int:
        """Bytes needed for one residue array of ``wheel_len`` flags."""
        if self is FlagWidth.BIT:
            return -(-wheel_len // 8)
        return wheel_len * (4 if self is FlagWidth.WORD4 else 1)

    def _new_array(self, wheel_len: int) -> np.ndarray:
        if self is FlagWidth.BIT:
            return np.full(self.array_bytes(wheel_len), 0xFF, dtype=np.uint8)
        return np.ones(wheel_len, dtype=self.dtype)


_WIDTH_CODES = {FlagWidth.BIT: 0, FlagWidth.BYTE: 1, FlagWidth.WORD4: 2}


class SegmentBitmap:
    """Flags for the values ``[segment_start, segment_start + 6*wheel_len)``.

    ``marks_r1[k]`` stands for ``segment_start + 6k + 1`` and ``marks_r5[k]``
    for ``segment_start + 6k + 5``. A set flag means "possibly prime". In
    ``bit`` width each array packs eight flags per byte, least significant
    bit first.

    The storage can be reused for another segment with :meth:`reset`, as long
    as the new length fits the allocated capacity.
    """

    def __init__(self, segment_start: int, wheel_len: int, width: FlagWidth | str = FlagWidth.BIT):
        _check_segment(segment_start, wheel_len)
        self.width = FlagWidth(width)
        self.capacity = wheel_len
        self.segment_start = segment_start
        self.wheel_len = wheel_len
        self.marks_r1 = self.width._new_array(wheel_len)
        self.marks_r5 = self.width._new_array(wheel_len)

    def __repr__(self) -> str:
        return (
            f"SegmentBitmap(start={self.segment_start}, wheel_len={self.wheel_len}, "
            f"width={self.width.value})"
        )

    @property
    def lo_index(self) -> int:
        return self.segment_start // 6

    @property
    def end(self) -> int:
        """One past the last value covered."""
        return self.segment_start + 6 * self.wheel_len

    @property
    def flag_entries(self) -> int:
        return 2 * self.wheel_len

    @property
    def nbytes(self) -> int:
        return self.marks_r1.nbytes + self.marks_r5.nbytes

    def reset(self, segment_start: int, wheel_len: int | None = None) -> None:
        wheel_len = self.capacity if wheel_len is None else wheel_len
        _check_segment(segment_start, wheel_len)
        if wheel_len > self.capacity:
            raise WheelError(f"wheel_len {wheel_len} exceeds capacity {self.capacity}")
        self.segment_start = segment_start
        self.wheel_len = wheel_len
        fill = 0xFF if self.width is FlagWidth.BIT else 1
        self.marks_r1.fill(fill)
        self.marks_r5.fill(fill)

    def _locate(self, value: int) -> tuple[np.ndarray, int]:
        c = coord_of(value)
        k = c.index - self.lo_index
        if not 0 <= k < self.wheel_len:
            raise WheelError(f"{value} is outside {self!r}")
        return (self.marks_r1 if c.residue == 1 else self.marks_r5), k

    def get(self, value: int) -> bool:
        arr, k = self._locate(value)
        if self.width is FlagWidth.BIT:
            return bool(arr[k >> 3] >> (k & 7) & 1)
        return bool(arr[k])

    def clear(self, value: int) -> None:
        arr, k = self._locate(value)
        if self.width is FlagWidth.BIT:
            arr[k >> 3] &= np.uint8(~(1 << (k & 7)) & 0xFF)
        else:
            arr[k] = 0

    def primes(self, limit: int = WORD_MAX, backend: ModuleType | None = None) -> np.ndarray:
        """Flagged values ``<= limit``, ascending, as ``uint64``. Value 1 is never reported."""
        be = backend or kernel.default
        return be.collect(
            self.marks_r1, self.marks_r5, self.width.code, self.lo_index, self.wheel_len, limit
        )


def _check_segment(segment_start: int, wheel_len: int) -> None:
    if wheel_len < 1:
        raise WheelError(f"wheel_len must be positive, got {wheel_len}")
    if segment_start < 0 or segment_start % 6:
        raise WheelError(f"segment_start={segment_start} is not a non-negative multiple of 6")
    if segment_start + 6 * wheel_len - 1 > WORD_MAX:
        raise WordOverflowError("segment extends past the 64-bit word")


def new_segment(segment_start: int, wheel_len: int, width: FlagWidth | str = FlagWidth.BIT) -> SegmentBitmap:
    return SegmentBitmap(segment_start, wheel_len, width)


class BasePrimeStore:
    """Ascending sieving primes from 5 up to ``frontier``, stored flat.

    ``frontier`` is the value up to which the store is complete. A prime
    takes part in sieving ``[lo, hi)`` only once ``p*p < hi``.
    """

    def __init__(self, primes=(), frontier: int = 4):
        arr = np.asarray(primes, dtype=np.uint64)
        if arr.size and (arr[0] < 5 or np.any(np.diff(arr) == 0) or np.any(arr[1:] < arr[:-1])):
            raise ValueError("base primes must be strictly increasing and >= 5")
        if arr.size and int(arr[-1]) > frontier:
            raise ValueError("frontier below the largest stored prime")
        self._buf = arr.copy()
        self._n = arr.size
        self.frontier = frontier

    def __len__(self) -> int:
        return self._n

    def __repr__(self) -> str:
        return f"BasePrimeStore(n={self._n}, frontier={self.frontier})"

    @property
    def primes(self) -> np.ndarray:
        return self._buf[: self._n]

    @property
    def squares(self) -> list[int]:
        return [p * p for p in self.primes.tolist()]

    def append(self, new: np.ndarray, frontier: int) -> None:
        """Add primes above the current contents and advance the frontier."""
        new = np.asarray(new, dtype=np.uint64)
        if frontier < self.frontier:
            raise ValueError("frontier cannot move backwards")
        if new.size:
            if self._n and new[0] <= self._buf[self._n - 1]:
                raise ValueError("appended primes must exceed the stored ones")
            if int(new[-1]) > frontier:
                raise ValueError("appended prime beyond the new frontier")
            need = self._n + new.size
            if need > self._buf.size:
                grown = np.empty(max(need, 2 * self._buf.size, 64), dtype=np.uint64)
                grown[: self._n] = self._buf[: self._n]
                self._buf = grown
            self._buf[self._n : need] = new
            self._n = need
        self.frontier = frontier

    def covers(self, hi: int) -> bool:
        """True if every prime needed to sieve values below ``hi`` is stored."""
        return hi <= 1 or math.isqrt(hi - 1) <= self.frontier

    def active(self, hi: int) -> np.ndarray:
        """Primes with ``p*p < hi``."""
        if hi <= 1:
            return self.primes[:0]
        n = int(np.searchsorted(self.primes, math.isqrt(hi - 1), side="right"))
        return self.primes[:n]


def sieve_segment(seg: SegmentBitmap, base: BasePrimeStore, backend: ModuleType | None = None) -> SegmentBitmap:
    """Clear every composite in ``seg`` using the active primes of ``base``."""
    if not base.covers(seg.end):
        raise IncompleteBaseError(
            f"base frontier {base.frontier} is below sqrt({seg.end - 1}); extend the base first"
        )
    be = backend or kernel.default
    be.sieve(seg.marks_r1, seg.marks_r5, seg.width.code, seg.lo_index, seg.wheel_len,
             base.active(seg.end))
    return seg


def bootstrap_base(limit_hint: int) -> BasePrimeStore:
    """Sieving primes for ``limit_hint``: everything from 5 to ceil(sqrt(limit_hint))."""
    if limit_hint < 25:
        raise WheelError(f"limit_hint must be at least 25, got {limit_hint}")
    r = math.isqrt(limit_hint)
    if r * r < limit_hint:
        r += 1
    return BasePrimeStore([p for p in naive_sieve(r) if p >= 5], frontier=r)


def extend_base(base: BasePrimeStore, new_frontier: int, backend: ModuleType | None = None) -> BasePrimeStore:
    """Grow ``base`` until it holds every prime up to ``new_frontier``.

    The store sieves its own extension: primes up to ``f`` are enough to sieve
    up to ``f*f``, so large jumps are taken in several squaring steps.
    """
    if base.frontier < 5:
        raise WheelError("extend_base needs a bootstrapped store (frontier >= 5)")
    while base.frontier < new_frontier:
        step_to = min(new_frontier, base.frontier * base.frontier)
        lo = (base.frontier + 1) // 6 * 6
        found = []
        while lo <= step_to:
            wl = min(_EXTEND_CHUNK, (step_to - lo) // 6 + 1)
            seg = sieve_segment(new_segment(lo, wl), base, backend)
            found.append(seg.primes(step_to, backend))
            lo = seg.end
        got = np.concatenate(found)
        base.append(got[got > np.uint64(base.frontier)], step_to)
    return base


def primes_unbounded(segment_wheel_len: int, *, width: FlagWidth | str = FlagWidth.BIT,
                     word_max: int = WORD_MAX,
                     backend: ModuleType | None = None) -> Iterator[int]:
    """Yield 2, 3, 5, 7, ... segment by segment with no upper bound.

    The base store is extended between segments, at least doubling its
    frontier each time. When the next segment would pass ``word_max`` the
    stream yields what fits and then raises :class:`WordOverflowError`.
    """
    if segment_wheel_len < 1:
        raise WheelError(f"segment_wheel_len must be positive, got {segment_wheel_len}")
    yield 2
    yield 3
    base = bootstrap_base(25)
    seg = new_segment(0, segment_wheel_len, width)
    lo = 0
    while True:
        wl = segment_wheel_len
        overflow = lo + 6 * wl - 1 > word_max
        if overflow:
            wl = (word_max - lo) // 6 + 1
        seg.reset(lo, wl)
        need = math.isqrt(seg.end - 1)
        if base.frontier < need:
            extend_base(base, max(need, 2 * base.frontier), backend)
        sieve_segment(seg, base, backend)
        yield from seg.primes(word_max, backend).tolist()
        if overflow or seg.end - 1 == word_max:
            raise WordOverflowError(f"prime stream reached the word limit {word_max}")
        lo = seg.end
