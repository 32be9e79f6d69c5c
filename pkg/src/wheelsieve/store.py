"""Destinations for enumerated primes.

Every sink takes ascending batches and refuses anything that does not
continue the sequence. :class:`ChunkedFileSink` writes numbered files of at
most ``primes_per_file`` primes plus a ``manifest.json``::

    <dir>/primes_00000.txt      one decimal prime per line   (format="text")
    <dir>/primes_00000.bin      8-byte little-endian uint64  (format="binary")
    <dir>/manifest.json

The manifest records the format, the cap, the frontier the run reached, and
for each file its name, count, min, max and CRC-32 (hex) of the file bytes.
"""
from __future__ import annotations

import bisect
import io
import json
import os
import zlib
from pathlib import Path
from typing import IO, Iterable

import numpy as np

__all__ = [
    "DEFAULT_PRIMES_PER_FILE",
    "MANIFEST_NAME",
    "OrderingError",
    "StoreError",
    "ManifestError",
    "ChecksumError",
    "RangeBeyondFrontierError",
    "PrimeSink",
    "CountSink",
    "ListSink",
    "StreamSink",
    "ChunkedFileSink",
    "read_manifest",
    "verify_checksums",
    "read_back",
]

DEFAULT_PRIMES_PER_FILE = 125_000_000
MANIFEST_NAME = "manifest.json"
_SUFFIX = {"text": "txt", "binary": "bin"}
_LE_U64 = np.dtype("<u8")


class OrderingError(ValueError):
    """A batch was not ascending or did not continue past the last prime."""


class StoreError(OSError):
    """Writing failed; ``persisted`` primes were safely written before it."""

    def __init__(self, msg: str, persisted: int = 0):
        super().__init__(msg)
        self.persisted = persisted


class ManifestError(ValueError):
    pass


class ChecksumError(ValueError):
    pass


class RangeBeyondFrontierError(ValueError):
    pass


def _as_batch(batch: Iterable[int]) -> np.ndarray:
    if isinstance(batch, np.ndarray):
        return batch.astype(np.uint64, copy=False)
    return np.fromiter((int(x) for x in batch), dtype=np.uint64)


class PrimeSink:
    """Base class: ordering checks and running totals."""

    def __init__(self) -> None:
        self.count = 0
        self.last: int | None = None

    def emit(self, batch: Iterable[int]) -> int:
        """Accept an ascending batch; returns the running count."""
        arr = _as_batch(batch)
        if arr.size == 0:
            return self.count
        if arr.size > 1 and not bool(np.all(arr[1:] > arr[:-1])):
            raise OrderingError("batch is not strictly ascending")
        if self.last is not None and int(arr[0]) <= self.last:
            raise OrderingError(f"batch starts at {int(arr[0])}, not after {self.last}")
        self._write(arr)
        self.count += int(arr.size)
        self.last = int(arr[-1])
        return self.count

    def _write(self, arr: np.ndarray) -> None:
        pass

    def close(self, frontier: int | None = None) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc) -> None:
        self.close()


class CountSink(PrimeSink):
    """Keeps only the count and the largest prime."""


class ListSink(PrimeSink):
    """Holds everything in memory."""

    def __init__(self) -> None:
        super().__init__()
        self._chunks: list[np.ndarray] = []

    def _write(self, arr: np.ndarray) -> None:
        self._chunks.append(arr.copy())

    def array(self) -> np.ndarray:
        if not self._chunks:
            return np.empty(0, dtype=np.uint64)
        if len(self._chunks) > 1:
            self._chunks = [np.concatenate(self._chunks)]
        return self._chunks[0]

    @property
    def primes(self) -> list[int]:
        return self.array().tolist()

    def tobytes(self) -> bytes:
        """The stream as little-endian uint64, for byte-level comparisons."""
        return self.array().astype(_LE_U64).tobytes()


class StreamSink(PrimeSink):
    """Writes one decimal prime per line to a text stream."""

    def __init__(self, stream: IO[str]):
        super().__init__()
        self.stream = stream

    def _write(self, arr: np.ndarray) -> None:
        self.stream.write("\n".join(map(str, arr.tolist())))
        self.stream.write("\n")

    def close(self, frontier: int | None = None) -> None:
        self.stream.flush()


def _encode(arr: np.ndarray, fmt: str) -> bytes:
    if fmt == "binary":
        return arr.astype(_LE_U64).tobytes()
    return ("\n".join(map(str, arr.tolist())) + "\n").encode("ascii")


def _decode(data: bytes, fmt: str) -> np.ndarray:
    if fmt == "binary":
        if len(data) % 8:
            raise ManifestError("binary prime file length is not a multiple of 8")
        return np.frombuffer(data, dtype=_LE_U64).astype(np.uint64)
    if not data:
        return np.empty(0, dtype=np.uint64)
    return np.array(data.split(), dtype=np.uint64)


class ChunkedFileSink(PrimeSink):
    """Numbered prime files of at most ``primes_per_file`` entries each.

    Files are opened lazily and rolled over at the cap. The manifest is
    rewritten on :meth:`flush` and :meth:`close`, so a directory is readable
    up to the last flush even if the process dies afterwards.
    """

    def __init__(self, directory: str | os.PathLike, primes_per_file: int = DEFAULT_PRIMES_PER_FILE,
                 fmt: str = "text"):
        super().__init__()
        if fmt not in _SUFFIX:
            raise ValueError(f"format must be 'text' or 'binary', got {fmt!r}")
        if primes_per_file < 1:
            raise ValueError("primes_per_file must be >= 1")
        self.dir = Path(directory)
        self.primes_per_file = primes_per_file
        self.format = fmt
        self.files: list[dict] = []
        self.frontier: int | None = None
        self._fh: io.BufferedWriter | None = None
        self._crc = 0
        self._persisted = 0
        try:
            self.dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise StoreError(f"cannot create {self.dir}: {e}") from e

    def _open_next(self) -> None:
        name = f"primes_{len(self.files):05d}.{_SUFFIX[self.format]}"
        self._fh = open(self.dir / name, "wb")
        self._crc = 0
        self.files.append({"name": name, "count": 0, "min": None, "max": None, "checksum": None})

    def _write(self, arr: np.ndarray) -> None:
        try:
            pos = 0
            while pos < arr.size:
                if self._fh is None or self.files[-1]["count"] >= self.primes_per_file:
                    self._finish_file()
                    self._open_next()
                entry = self.files[-1]
                take = min(self.primes_per_file - entry["count"], arr.size - pos)
                part = arr[pos : pos + take]
                data = _encode(part, self.format)
                self._fh.write(data)
                self._crc = zlib.crc32(data, self._crc)
                if entry["min"] is None:
                    entry["min"] = int(part[0])
                entry["max"] = int(part[-1])
                entry["count"] += take
                entry["checksum"] = f"{self._crc:08x}"
                pos += take
        except OSError as e:
            raise StoreError(f"write to {self.dir} failed: {e}", self._persisted) from e

    def _finish_file(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def flush(self) -> None:
        try:
            if self._fh is not None:
                self._fh.flush()
                os.fsync(self._fh.fileno())
            self._write_manifest()
        except OSError as e:
            raise StoreError(f"flush of {self.dir} failed: {e}", self._persisted) from e
        self._persisted = self.count

    def _write_manifest(self) -> None:
        manifest = {
            "format": self.format,
            "primes_per_file": self.primes_per_file,
            "total": self.count,
            "frontier": self.frontier if self.frontier is not None else self.last,
            "files": self.files,
        }
        tmp = self.dir / (MANIFEST_NAME + ".tmp")
        tmp.write_text(json.dumps(manifest, indent=2) + "\n")
        os.replace(tmp, self.dir / MANIFEST_NAME)

    def close(self, frontier: int | None = None) -> None:
        """Finish the current file and write the manifest.

        ``frontier`` is the largest value the producer has fully covered (the
        sieve limit); it defaults to the last prime written.
        """
        if frontier is not None:
            self.frontier = frontier
        self.flush()
        self._finish_file()


def read_manifest(directory: str | os.PathLike) -> dict:
    path = Path(directory) / MANIFEST_NAME
    try:
        manifest = json.loads(path.read_text())
    except FileNotFoundError:
        raise ManifestError(f"no manifest in {directory}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ManifestError(f"corrupt manifest {path}: {e}") from e
    try:
        if manifest["format"] not in _SUFFIX:
            raise ManifestError(f"unknown format {manifest['format']!r}")
        for f in manifest["files"]:
            f["name"], f["count"], f["min"], f["max"], f["checksum"]
        int(manifest["primes_per_file"])
    except (KeyError, TypeError) as e:
        raise ManifestError(f"corrupt manifest {path}: missing {e}") from e
    return manifest


def _load_file(directory: Path, entry: dict, fmt: str) -> np.ndarray:
    data = (directory / entry["name"]).read_bytes()
    if f"{zlib.crc32(data):08x}" != entry["checksum"]:
        raise ChecksumError(f"checksum mismatch in {entry['name']}")
    arr = _decode(data, fmt)
    if arr.size != entry["count"]:
        raise ChecksumError(f"{entry['name']} holds {arr.size} primes, manifest says {entry['count']}")
    return arr


def verify_checksums(directory: str | os.PathLike) -> int:
    """Check every file against the manifest; returns the number of files."""
    directory = Path(directory)
    manifest = read_manifest(directory)
    for entry in manifest["files"]:
        _load_file(directory, entry, manifest["format"])
    return len(manifest["files"])


def read_back(directory: str | os.PathLike, lo: int, hi: int) -> list[int]:
    """Primes in ``[lo, hi)`` from a directory written by :class:`ChunkedFileSink`.

    Only files whose min/max range meets the query are read, and each of
    those is checksummed first.
    """
    directory = Path(directory)
    manifest = read_manifest(directory)
    if hi <= lo:
        return []
    frontier = manifest.get("frontier")
    if frontier is None or hi - 1 > frontier:
        raise RangeBeyondFrontierError(f"[{lo}, {hi}) extends past the written frontier {frontier}")
    files = [f for f in manifest["files"] if f["count"]]
    maxes = [f["max"] for f in files]
    out: list[int] = []
    for entry in files[bisect.bisect_left(maxes, lo):]:
        if entry["min"] >= hi:
            break
        arr = _load_file(directory, entry, manifest["format"])
        a, b = np.searchsorted(arr, [lo, hi], side="left")
        out.extend(arr[a:b].tolist())
    return out
