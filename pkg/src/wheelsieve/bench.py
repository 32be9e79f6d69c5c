"""Benchmark matrix: threads x limit x segment span x flag width.

Points run one after another with a count-only sink, so the timing covers
sieving and not output. Each point keeps the fastest of ``repeats`` runs.
A point whose prime count disagrees with any other point for the same limit
voids the whole benchmark.
"""
from __future__ import annotations

import csv
import itertools
from dataclasses import astuple, dataclass, fields
from typing import Callable, Iterable, TextIO

from .engine import SieveConfig, run
from .segment import FlagWidth
from .store import CountSink

__all__ = ["CSV_HEADER", "BenchPoint", "BenchMismatch", "run_point", "run_matrix", "write_csv"]


@dataclass
class BenchPoint:
    threads: int
    limit: int
    segment_span: int
    flag_width: str
    wall_ms: float
    iterations: int
    peak_flag_bytes: int
    prime_count: int


CSV_HEADER = tuple(f.name for f in fields(BenchPoint))


class BenchMismatch(RuntimeError):
    pass


def run_point(limit: int, threads: int, segment_span: int, flag_width: FlagWidth | str = "bit",
              repeats: int = 1, backend: str | None = None,
              spawn_per_iteration: bool = False) -> BenchPoint:
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    best = None
    counts = set()
    for _ in range(repeats):
        cfg = SieveConfig(limit, threads=threads, segment_span=segment_span, sink=CountSink(),
                          flag_width=flag_width, backend=backend,
                          spawn_per_iteration=spawn_per_iteration)
        rep = run(cfg)
        counts.add(rep.prime_count)
        if best is None or rep.wall_time < best.wall_time:
            best = rep
    if len(counts) != 1:
        raise BenchMismatch(f"limit={limit} threads={threads}: counts differ across repeats {counts}")
    return BenchPoint(threads, limit, segment_span, best.flag_width, round(best.wall_time * 1e3, 3),
                      best.iterations, best.peak_flag_bytes, best.prime_count)


def run_matrix(limits: Iterable[int], threads: Iterable[int], segments: Iterable[int],
               flag_widths: Iterable[str] = ("bit",), repeats: int = 1,
               backend: str | None = None, spawn_per_iteration: bool = False,
               on_point: Callable[[BenchPoint], None] | None = None) -> list[BenchPoint]:
    points = []
    expected: dict[int, int] = {}
    for limit, t, s, w in itertools.product(limits, threads, segments, flag_widths):
        pt = run_point(limit, t, s, w, repeats, backend, spawn_per_iteration)
        want = expected.setdefault(limit, pt.prime_count)
        if pt.prime_count != want:
            raise BenchMismatch(
                f"limit={limit}: {pt.prime_count} primes at threads={t} segment={s} width={w}, "
                f"{want} elsewhere"
            )
        points.append(pt)
        if on_point is not None:
            on_point(pt)
    return points


def write_csv(points: Iterable[BenchPoint], out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for pt in points:
        w.writerow(astuple(pt))
