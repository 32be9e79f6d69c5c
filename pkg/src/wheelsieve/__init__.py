"""Wheel-6 segmented, incremental, multithreaded Sieve of Eratosthenes."""
from .engine import (
    UNBOUNDED,
    SieveAborted,
    SieveConfig,
    SieveEngine,
    SieveReport,
    WorkerAssignment,
    plan_iteration,
    round_segment_span,
    run,
    run_unbounded,
)
from .kernel import BACKENDS, get_backend
from .segment import (
    BasePrimeStore,
    FlagWidth,
    IncompleteBaseError,
    SegmentBitmap,
    bootstrap_base,
    extend_base,
    new_segment,
    primes_unbounded,
    sieve_segment,
)
from .store import ChunkedFileSink, CountSink, ListSink, OrderingError, StreamSink, read_back
from .wheel import (
    WORD_MAX,
    NotOnWheelError,
    ResidueClass,
    StartOffsets,
    WheelCoord,
    WheelError,
    WordOverflowError,
    coord_of,
    greatest_multiple_below,
    naive_sieve,
    sieve_start,
    start_offsets,
    value_of,
)

__version__ = "0.1.0"
