"""Multithreaded driver: tiles each iteration among ``t`` workers.

Iteration ``i`` covers ``[i*S, (i+1)*S)``. Worker ``j`` owns the contiguous
sub-range ``[i*S + j*S/t, i*S + (j+1)*S/t)`` and its own flag arrays, so no
two workers ever write the same memory. The base primes are shared
read-only while workers run; the orchestrator grows them, and writes to the
sink, only after every worker of the iteration has finished.
"""
from __future__ import annotations

import contextlib
import logging
import math
import os
import signal
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernel
from .segment import (
    BasePrimeStore,
    FlagWidth,
    IncompleteBaseError,
    SegmentBitmap,
    bootstrap_base,
    extend_base,
)
from .store import CountSink, PrimeSink
from .wheel import WORD_MAX, WheelError, WordOverflowError

log = logging.getLogger(__name__)

__all__ = [
    "UNBOUNDED",
    "DEFAULT_MAX_THREADS",
    "SieveConfig",
    "WorkerAssignment",
    "SieveReport",
    "SieveAborted",
    "SieveEngine",
    "plan_iteration",
    "round_segment_span",
    "run",
    "run_unbounded",
    "interrupt_stops",
]

#: ``SieveConfig.limit`` value meaning "no upper bound".
UNBOUNDED = None

DEFAULT_MAX_THREADS = max(64, 8 * (os.cpu_count() or 1))

_SMALL = np.array([2, 3], dtype=np.uint64)


@dataclass
class SieveConfig:
    limit: int | None
    threads: int = 1
    segment_span: int = 6_000_000
    sink: PrimeSink | None = None
    flag_width: FlagWidth | str = FlagWidth.BIT
    spawn_per_iteration: bool = False
    backend: str | None = None
    max_threads: int = DEFAULT_MAX_THREADS
    # test hook: values whose flags are cleared after sieving
    poison: frozenset[int] = frozenset()
    debug: bool = False

    def __post_init__(self) -> None:
        self.flag_width = FlagWidth(self.flag_width)
        self.poison = frozenset(self.poison)
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        if self.threads > self.max_threads:
            raise ValueError(f"threads={self.threads} exceeds the cap {self.max_threads}")
        if self.segment_span <= 0 or self.segment_span % (6 * self.threads):
            raise ValueError(
                f"segment_span={self.segment_span} must be a positive multiple of 6*threads={6 * self.threads}"
            )
        if self.limit is not None and self.limit > WORD_MAX:
            raise WordOverflowError(f"limit {self.limit} exceeds the 64-bit word")
        if self.sink is None:
            self.sink = CountSink()

    @property
    def worker_span(self) -> int:
        return self.segment_span // self.threads

    @property
    def worker_wheel_len(self) -> int:
        return self.worker_span // 6

    @property
    def flag_entries(self) -> int:
        """Flags allocated for one iteration across all workers (= S/3)."""
        return 2 * self.worker_wheel_len * self.threads

    @property
    def peak_flag_bytes(self) -> int:
        return 2 * self.flag_width.array_bytes(self.worker_wheel_len) * self.threads


@dataclass(frozen=True)
class WorkerAssignment:
    iteration: int
    worker: int
    lo: int
    hi: int


@dataclass
class SieveReport:
    prime_count: int = 0
    largest_prime: int | None = None
    iterations: int = 0
    wall_time: float = 0.0
    peak_flag_bytes: int = 0
    threads: int = 1
    segment_span: int = 0
    flag_width: str = "bit"
    frontier: int | None = None  # every prime <= frontier has been emitted
    stopped: bool = False
    overflowed: bool = False
    oversubscribed: bool = False


class SieveAborted(RuntimeError):
    """The run stopped on an error; ``report`` holds the progress made."""

    def __init__(self, msg: str, report: SieveReport):
        super().__init__(msg)
        self.report = report


def round_segment_span(span: int, threads: int) -> int:
    """Smallest multiple of ``6*threads`` that is ``>= span``."""
    unit = 6 * threads
    return max(unit, -(-span // unit) * unit)


def plan_iteration(config: SieveConfig, iteration: int) -> list[WorkerAssignment]:
    if iteration < 0:
        raise ValueError(f"iteration must be >= 0, got {iteration}")
    s, t = config.segment_span, config.threads
    start = iteration * s
    if start + s - 1 > WORD_MAX:
        raise WordOverflowError(f"iteration {iteration} ends past the 64-bit word")
    w = s // t
    return [WorkerAssignment(iteration, j, start + j * w, start + (j + 1) * w) for j in range(t)]


class _Workers:
    """Runs one call per worker and returns results in worker order."""

    def __init__(self, threads: int, spawn_per_iteration: bool):
        self.threads = threads
        self.spawn = spawn_per_iteration
        self.pool = None
        if threads > 1 and not spawn_per_iteration:
            self.pool = ThreadPoolExecutor(threads, thread_name_prefix="sieve")

    def map(self, fn, items: list) -> list:
        if self.threads == 1:
            return [fn(x) for x in items]
        if self.pool is not None:
            return list(self.pool.map(fn, items))
        out: list = [None] * len(items)
        errors: list[BaseException] = []

        def body(k: int) -> None:
            try:
                out[k] = fn(items[k])
            except BaseException as e:  # re-raised on the orchestrator thread
                errors.append(e)

        ths = [threading.Thread(target=body, args=(k,)) for k in range(len(items))]
        for th in ths:
            th.start()
        for th in ths:
            th.join()
        if errors:
            raise errors[0]
        return out

    def close(self) -> None:
        if self.pool is not None:
            self.pool.shutdown()


@dataclass
class _DebugLedger:
    assignments: list[list[WorkerAssignment]] = field(default_factory=list)
    base_updates: list[tuple[int, int]] = field(default_factory=list)  # (iteration, workers busy)
    violations: list[str] = field(default_factory=list)


class SieveEngine:
    """One configured sieve run. Not reentrant: a second concurrent run raises."""

    def __init__(self, config: SieveConfig):
        self.config = config
        self.backend = kernel.get_backend(config.backend)
        self.ledger = _DebugLedger() if config.debug else None
        self._running = threading.Lock()
        self._busy = 0
        self._busy_lock = threading.Lock()

    # -- public -------------------------------------------------------

    def run(self) -> SieveReport:
        cfg = self.config
        if cfg.limit is None:
            raise ValueError("run() needs a finite limit; use run_unbounded()")
        if cfg.limit < 2:
            raise WheelError(f"limit must be >= 2, got {cfg.limit}")
        return self._drive(cfg.limit, stop=None, word_max=WORD_MAX)

    def run_unbounded(self, stop: threading.Event | None = None, *,
                      word_max: int = WORD_MAX) -> SieveReport:
        if self.config.limit is not None:
            raise ValueError("run_unbounded() needs limit=UNBOUNDED")
        return self._drive(None, stop=stop or threading.Event(), word_max=word_max)

    # -- internals ----------------------------------------------------

    def _new_report(self) -> SieveReport:
        cfg = self.config
        return SieveReport(
            peak_flag_bytes=cfg.peak_flag_bytes,
            threads=cfg.threads,
            segment_span=cfg.segment_span,
            flag_width=cfg.flag_width.value,
            oversubscribed=cfg.threads > (os.cpu_count() or 1),
        )

    def _drive(self, limit: int | None, stop: threading.Event | None, word_max: int) -> SieveReport:
        if not self._running.acquire(blocking=False):
            raise RuntimeError("this engine is already running")
        cfg = self.config
        report = self._new_report()
        workers = _Workers(cfg.threads, cfg.spawn_per_iteration)
        bitmaps = [SegmentBitmap(0, cfg.worker_wheel_len, cfg.flag_width) for _ in range(cfg.threads)]
        top = word_max if limit is None else limit
        bound = None if limit is None else math.isqrt(limit)
        base = bootstrap_base(max(25, min(cfg.segment_span, top + 1)))
        t0 = time.perf_counter()
        try:
            i = 0
            while stop is None or not stop.is_set():
                it_lo = i * cfg.segment_span
                if it_lo > top:
                    break
                it_hi = min(it_lo + cfg.segment_span, top + 1)
                last = it_lo + cfg.segment_span > top
                if limit is None:
                    need = math.isqrt(it_hi - 1)
                    if base.frontier < need:
                        self._update_base(i, lambda: extend_base(
                            base, max(need, 2 * base.frontier), self.backend))
                if not base.covers(it_hi):
                    raise IncompleteBaseError(f"base frontier {base.frontier} too small for {it_hi}")
                active = base.active(it_hi)
                plan = self._plan(i, it_hi)
                if self.ledger is not None:
                    self._check_disjoint(plan)
                    self.ledger.assignments.append(plan)

                batches = workers.map(
                    lambda a: self._work(a, bitmaps[a.worker], active, top), plan
                )
                # barrier: every worker of iteration i has returned
                batch = np.concatenate(batches) if batches else _SMALL[:0]
                if i == 0:
                    batch = np.concatenate((_SMALL[_SMALL <= np.uint64(top)], batch))
                if bound is not None and base.frontier < bound:
                    fresh = batch[(batch > np.uint64(base.frontier)) & (batch <= np.uint64(bound))
                                  & (batch >= np.uint64(5))]
                    new_frontier = max(base.frontier, min(bound, it_hi - 1))
                    self._update_base(i, lambda: base.append(fresh, new_frontier))
                self._emit(batch, report)
                report.frontier = it_hi - 1
                report.iterations += 1
                i += 1
                if last:
                    if limit is None:
                        report.overflowed = True
                    break
            else:
                report.stopped = True
        finally:
            report.wall_time = time.perf_counter() - t0
            workers.close()
            self._running.release()
        return report

    def _plan(self, iteration: int, it_hi: int) -> list[WorkerAssignment]:
        cfg = self.config
        start = iteration * cfg.segment_span
        if start + cfg.segment_span - 1 <= WORD_MAX:
            return plan_iteration(cfg, iteration)
        # final iteration at the word limit: clip instead of failing
        w = cfg.worker_span
        return [WorkerAssignment(iteration, j, start + j * w, min(start + (j + 1) * w, it_hi))
                for j in range(cfg.threads)]

    def _work(self, a: WorkerAssignment, bm: SegmentBitmap, active: np.ndarray, top: int) -> np.ndarray:
        with self._busy_lock:
            self._busy += 1
        try:
            end = min(a.hi, top + 1)
            if end <= a.lo:
                return _SMALL[:0]
            wl = (end - a.lo + 5) // 6
            bm.reset(a.lo, wl)
            self.backend.sieve(bm.marks_r1, bm.marks_r5, bm.width.code, bm.lo_index, wl, active)
            for v in self.config.poison:
                if a.lo <= v < bm.end and v % 6 in (1, 5):
                    bm.clear(v)
            return bm.primes(top, self.backend)
        finally:
            with self._busy_lock:
                self._busy -= 1

    def _update_base(self, iteration: int, fn) -> None:
        with self._busy_lock:
            busy = self._busy
        if self.ledger is not None:
            self.ledger.base_updates.append((iteration, busy))
            if busy:
                self.ledger.violations.append(f"base grown while {busy} workers busy")
        fn()

    def _check_disjoint(self, plan: list[WorkerAssignment]) -> None:
        spans = sorted((a.lo, a.hi) for a in plan)
        for (lo1, hi1), (lo2, hi2) in zip(spans, spans[1:]):
            if lo2 < hi1:
                self.ledger.violations.append(f"overlap [{lo1},{hi1}) / [{lo2},{hi2})")

    def _emit(self, batch: np.ndarray, report: SieveReport) -> None:
        if batch.size == 0:
            return
        try:
            self.config.sink.emit(batch)
        except Exception as e:
            raise SieveAborted(f"sink write failed: {e}", report) from e
        report.prime_count += int(batch.size)
        report.largest_prime = int(batch[-1])


def run(config: SieveConfig) -> SieveReport:
    """Sieve to ``config.limit``, delivering every prime to ``config.sink``."""
    return SieveEngine(config).run()


def run_unbounded(config: SieveConfig, stop: threading.Event | None = None, *,
                  word_max: int = WORD_MAX) -> SieveReport:
    """Sieve with no upper bound until ``stop`` is set or the word limit is reached.

    ``stop`` is checked before each iteration, so a stop that is already set
    emits nothing at all.
    """
    return SieveEngine(config).run_unbounded(stop, word_max=word_max)


@contextlib.contextmanager
def interrupt_stops(stop: threading.Event):
    """First SIGINT sets ``stop`` (finish the iteration); the second aborts."""
    if threading.current_thread() is not threading.main_thread():
        yield stop
        return

    def handler(signum, frame):
        if stop.is_set():
            raise KeyboardInterrupt
        log.warning("interrupt: stopping after the current iteration (again to abort)")
        stop.set()

    previous = signal.signal(signal.SIGINT, handler)
    try:
        yield stop
    finally:
        signal.signal(signal.SIGINT, previous)
