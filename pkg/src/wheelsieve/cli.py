"""``wheelsieve`` command line: sieve, verify, bench.

Exit codes: 0 success or PASS, 1 runtime failure or FAIL, 2 usage error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import threading
from decimal import Decimal, InvalidOperation

import numpy as np

from . import bench, kernel
from .engine import (
    SieveAborted,
    SieveConfig,
    interrupt_stops,
    round_segment_span,
    run,
    run_unbounded,
)
from .store import (
    DEFAULT_PRIMES_PER_FILE,
    ChunkedFileSink,
    CountSink,
    ListSink,
    StoreError,
    StreamSink,
)
from .wheel import NAIVE_SIEVE_CAP, WheelError, WordOverflowError, naive_sieve

log = logging.getLogger("wheelsieve")

DEFAULT_SEGMENT = 6_000_000
WIDTHS = ("bit", "byte", "word4")


def parse_int(text: str) -> int:
    """Integers like ``1000000``, ``1_000_000`` or ``1e6``."""
    try:
        if any(c in text for c in "eE"):
            d = Decimal(text)
            if d != d.to_integral_value():
                raise ValueError
            return int(d)
        return int(text, 10)
    except (ValueError, InvalidOperation):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None


def parse_limit(text: str) -> int | None:
    if text.strip().lower() == "unbounded":
        return None
    n = parse_int(text)
    if n < 2:
        raise argparse.ArgumentTypeError(f"limit must be >= 2, got {n}")
    return n


def parse_int_list(text: str) -> list[int]:
    return [parse_int(x) for x in text.split(",") if x.strip()]


def parse_width_list(text: str) -> list[str]:
    out = [x.strip() for x in text.split(",") if x.strip()]
    for w in out:
        if w not in WIDTHS:
            raise argparse.ArgumentTypeError(f"unknown flag width {w!r}")
    return out


def default_threads() -> int:
    env = os.environ.get("WHEELSIEVE_THREADS")
    if env:
        try:
            n = int(env)
            if n >= 1:
                return n
        except ValueError:
            pass
        log.warning("ignoring WHEELSIEVE_THREADS=%r", env)
    return os.cpu_count() or 1


def _segment_for(span: int, threads: int) -> int:
    if span < 6 or span % 6:
        raise argparse.ArgumentTypeError(f"--segment must be a positive multiple of 6, got {span}")
    rounded = round_segment_span(span, threads)
    if rounded != span:
        print(f"warning: segment {span} rounded up to {rounded} (a multiple of 6*threads)",
              file=sys.stderr)
    return rounded


def _threads(args, parser) -> int:
    if args.threads is None:
        return default_threads()
    if args.threads < 1:
        parser.error(f"--threads must be >= 1, got {args.threads}")
    return args.threads


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wheelsieve", description=__doc__.splitlines()[0])
    p.add_argument("--backend", choices=sorted(kernel.BACKENDS),
                   help="kernel backend (default: compiled when available)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--threads", type=parse_int, default=None,
                        help="worker threads (default: $WHEELSIEVE_THREADS or CPU count)")
        sp.add_argument("--segment", type=parse_int, default=DEFAULT_SEGMENT,
                        help="value span per iteration, multiple of 6 (default: %(default)s)")
        sp.add_argument("--flag-width", choices=WIDTHS, default="bit")
        sp.add_argument("--spawn-per-iteration", action="store_true",
                        help="start fresh worker threads every iteration")

    s = sub.add_parser("sieve", help="enumerate primes up to a limit, or unboundedly")
    s.add_argument("--limit", type=parse_limit, required=True, help="integer or 'unbounded'")
    common(s)
    out = s.add_mutually_exclusive_group()
    out.add_argument("--count-only", action="store_true")
    out.add_argument("--out", metavar="DIR", help="write chunked prime files here")
    s.add_argument("--format", choices=("text", "binary"), default="text")
    s.add_argument("--primes-per-file", type=parse_int, default=DEFAULT_PRIMES_PER_FILE)

    v = sub.add_parser("verify", help="compare the pipeline with the plain sieve")
    v.add_argument("--limit", type=parse_int, required=True)
    common(v)
    v.add_argument("--poison", type=parse_int, action="append", default=[],
                   help=argparse.SUPPRESS)

    b = sub.add_parser("bench", help="run the threads x limit x segment x width matrix")
    b.add_argument("--limits", type=parse_int_list, required=True)
    b.add_argument("--threads", type=parse_int_list, default=None)
    b.add_argument("--segments", type=parse_int_list, default=[DEFAULT_SEGMENT])
    b.add_argument("--flag-widths", type=parse_width_list, default=["bit"])
    b.add_argument("--repeats", type=parse_int, default=1)
    b.add_argument("--csv", metavar="PATH", help="CSV output (default: stdout)")
    b.add_argument("--spawn-per-iteration", action="store_true")
    return p


def _summary(rep) -> str:
    largest = "none" if rep.largest_prime is None else rep.largest_prime
    return f"count={rep.prime_count} largest={largest} ms={rep.wall_time * 1e3:.3f}"


def cmd_sieve(args, parser) -> int:
    threads = _threads(args, parser)
    try:
        segment = _segment_for(args.segment, threads)
    except argparse.ArgumentTypeError as e:
        parser.error(str(e))
    if args.primes_per_file < 1:
        parser.error("--primes-per-file must be >= 1")
    if args.count_only:
        sink = CountSink()
    elif args.out:
        try:
            sink = ChunkedFileSink(args.out, args.primes_per_file, args.format)
        except StoreError as e:
            print(f"error: {e}", file=sys.stderr)
            return 1
    else:
        sink = StreamSink(sys.stdout)
    try:
        cfg = SieveConfig(args.limit, threads=threads, segment_span=segment, sink=sink,
                          flag_width=args.flag_width, backend=args.backend,
                          spawn_per_iteration=args.spawn_per_iteration)
    except ValueError as e:
        parser.error(str(e))
    try:
        if args.limit is None:
            stop = threading.Event()
            with interrupt_stops(stop):
                rep = run_unbounded(cfg, stop)
        else:
            rep = run(cfg)
        sink.close(rep.frontier)
    except SieveAborted as e:
        print(f"error: {e}", file=sys.stderr)
        print(_summary(e.report))
        return 1
    except (StoreError, WordOverflowError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(_summary(rep))
    if rep.overflowed:
        print("error: reached the 64-bit word limit", file=sys.stderr)
        return 1
    return 0


def cmd_verify(args, parser) -> int:
    if args.limit < 2 or args.limit > NAIVE_SIEVE_CAP:
        parser.error(f"--limit must be in [2, {NAIVE_SIEVE_CAP}] for verification")
    threads = _threads(args, parser)
    try:
        segment = _segment_for(args.segment, threads)
        cfg = SieveConfig(args.limit, threads=threads, segment_span=segment, sink=ListSink(),
                          flag_width=args.flag_width, backend=args.backend,
                          spawn_per_iteration=args.spawn_per_iteration, poison=set(args.poison))
    except (argparse.ArgumentTypeError, ValueError) as e:
        parser.error(str(e))
    run(cfg)
    got = cfg.sink.array()
    want = np.array(naive_sieve(args.limit), dtype=np.uint64)
    if got.astype("<u8").tobytes() == want.astype("<u8").tobytes():
        print(f"PASS limit={args.limit} threads={threads} segment={segment} count={want.size}")
        return 0
    n = min(got.size, want.size)
    diff = np.flatnonzero(got[:n] != want[:n])
    if diff.size:
        k = int(diff[0])
        a, b = int(want[k]), int(got[k])
        prime, how = (a, "missing from pipeline") if a < b else (b, "not prime, emitted by pipeline")
    elif want.size > n:
        prime, how = int(want[n]), "missing from pipeline"
    else:
        prime, how = int(got[n]), "not prime, emitted by pipeline"
    print(f"FAIL limit={args.limit} first divergent prime {prime} ({how})")
    return 1


def cmd_bench(args, parser) -> int:
    threads = args.threads or [default_threads()]
    if args.repeats < 1:
        parser.error("--repeats must be >= 1")
    for t in threads:
        for s in args.segments:
            if t < 1 or s <= 0 or s % (6 * t):
                parser.error(f"segment {s} is not a positive multiple of 6*threads={6 * t}")
    for n in args.limits:
        if n < 2:
            parser.error(f"limit must be >= 2, got {n}")

    def progress(pt) -> None:
        log.info("threads=%d limit=%d segment=%d width=%s %.3f ms",
                 pt.threads, pt.limit, pt.segment_span, pt.flag_width, pt.wall_ms)

    try:
        points = bench.run_matrix(args.limits, threads, args.segments, args.flag_widths,
                                  args.repeats, args.backend, args.spawn_per_iteration, progress)
    except bench.BenchMismatch as e:
        print(f"error: benchmark void, {e}", file=sys.stderr)
        return 1
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            bench.write_csv(points, fh)
    else:
        bench.write_csv(points, sys.stdout)
    return 0


COMMANDS = {"sieve": cmd_sieve, "verify": cmd_verify, "bench": cmd_bench}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args, parser)
    except WheelError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        print("aborted", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
