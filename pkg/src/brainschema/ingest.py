"""Three-phase ingest pipeline: label ("for"), load, ingest.

Each worker owns a static, contiguous slice of the global triple sequence
and runs all three phases on its own batches. The store is the only shared
sink. Stores that pickle into independent writers (``process_safe``) get a
process pool; the rest get threads.
"""

from __future__ import annotations

import logging
import math
import multiprocessing
import struct
import time
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .codec import child_start
from .generate import BlockSpec, NeuronNamer, block_arrays, label_triples
from .schema import SchemaConfig

log = logging.getLogger(__name__)

DEFAULT_BATCH_SIZE = 10_000
KEY_SEP = b"\x00"
_WEIGHT = struct.Struct(">d")

AGGREGATION_NOTE = ("phase seconds = entries / sum over workers of "
                    "(worker entries / worker phase seconds)")


def encode_key(row_label: str, col_label: str) -> bytes:
    return row_label.encode() + KEY_SEP + col_label.encode()


def decode_key(key: bytes) -> tuple[str, str]:
    row, sep, col = key.partition(KEY_SEP)
    if not sep:
        raise ValueError(f"key {key!r} has no separator")
    return row.decode(), col.decode()


def encode_weight(weight: float) -> bytes:
    return _WEIGHT.pack(weight)


def decode_weight(value: bytes) -> float:
    return _WEIGHT.unpack(value)[0]


@dataclass
class IngestMetrics:
    entries: int
    workers: int
    for_seconds: float
    load_seconds: float
    ingest_seconds: float
    # None marks a rate that cannot be measured (entries with zero duration).
    for_rate: Optional[float]
    load_rate: Optional[float]
    ingest_rate: Optional[float]
    generate_seconds: float = 0.0
    wall_seconds: float = 0.0
    aggregation: str = AGGREGATION_NOTE


def _rate(entries: int, seconds: float) -> Optional[float]:
    if entries == 0:
        return 0.0
    if seconds <= 0:
        return None
    return entries / seconds


def measure_rates(entries: int, for_seconds: float, load_seconds: float,
                  ingest_seconds: float, workers: int = 1) -> IngestMetrics:
    """Rates are entries per second of each phase."""
    for name, v in (("for", for_seconds), ("load", load_seconds), ("ingest", ingest_seconds)):
        if v < 0 or math.isnan(v):
            raise ValueError(f"{name} duration must be >= 0, got {v}")
    return IngestMetrics(
        entries=entries, workers=workers,
        for_seconds=for_seconds, load_seconds=load_seconds, ingest_seconds=ingest_seconds,
        for_rate=_rate(entries, for_seconds),
        load_rate=_rate(entries, load_seconds),
        ingest_rate=_rate(entries, ingest_seconds),
    )


class IngestError(RuntimeError):
    """A run that did not finish; ``partial`` holds what completed."""

    def __init__(self, message: str, partial: IngestMetrics):
        super().__init__(message)
        self.partial = partial


@dataclass
class _Tally:
    entries: int = 0
    generate: float = 0.0
    label: float = 0.0
    load: float = 0.0
    ingest: float = 0.0
    error: Optional[str] = None


@dataclass
class _Piece:
    spec: BlockSpec
    lo: int
    hi: int


def partition_work(blocks: Sequence[BlockSpec], workers: int) -> list[list[_Piece]]:
    """Split the concatenated triples of ``blocks`` into ``workers`` contiguous
    slices of near-equal size; a slice may cut a block into sub-ranges."""
    sizes = [b.nnz for b in blocks]
    total = sum(sizes)
    out: list[list[_Piece]] = []
    for w in range(workers):
        lo, hi = child_start(total, workers, w), child_start(total, workers, w + 1)
        pieces = []
        base = 0
        for spec, n in zip(blocks, sizes):
            a, b = max(lo, base), min(hi, base + n)
            if a < b:
                pieces.append(_Piece(spec, a - base, b - base))
            base += n
        out.append(pieces)
    return out


def _run_worker(pieces: list[_Piece], config: SchemaConfig, batch_size: int, store) -> _Tally:
    tally = _Tally()
    clock = time.perf_counter
    namer = NeuronNamer(config)
    try:
        for piece in pieces:
            t0 = clock()
            rows, cols, weights = block_arrays(piece.spec)
            local = list(zip(rows[piece.lo:piece.hi].tolist(), cols[piece.lo:piece.hi].tolist(),
                             weights[piece.lo:piece.hi].tolist()))
            tally.generate += clock() - t0
            for start in range(0, len(local), batch_size):
                chunk = local[start:start + batch_size]
                t0 = clock()
                triples = list(label_triples(chunk, piece.spec, config, namer))
                t1 = clock()
                matrix = {(t[0], t[1]): t[2] for t in triples}
                t2 = clock()
                store.put_batch([(encode_key(r, c), _WEIGHT.pack(w)) for (r, c), w in matrix.items()])
                t3 = clock()
                tally.label += t1 - t0
                tally.load += t2 - t1
                tally.ingest += t3 - t2
                tally.entries += len(chunk)
                del matrix
        t0 = clock()
        store.flush()
        tally.ingest += clock() - t0
    except Exception as e:  # reported to the parent, which fails the run
        tally.error = f"{type(e).__name__}: {e}"
    return tally


def _aggregate_seconds(entries: int, tallies: list[_Tally], attr: str) -> float:
    throughput = 0.0
    for t in tallies:
        seconds = getattr(t, attr)
        if t.entries and seconds <= 0:
            return 0.0
        if t.entries:
            throughput += t.entries / seconds
    return entries / throughput if throughput else 0.0


def _combine(tallies: list[_Tally], workers: int, wall: float) -> IngestMetrics:
    entries = sum(t.entries for t in tallies)
    m = measure_rates(entries, _aggregate_seconds(entries, tallies, "label"),
                      _aggregate_seconds(entries, tallies, "load"),
                      _aggregate_seconds(entries, tallies, "ingest"), workers)
    m.generate_seconds = _aggregate_seconds(entries, tallies, "generate")
    m.wall_seconds = wall
    return m


def run_ingest(blocks: Sequence[BlockSpec], config: SchemaConfig, workers: int,
               store, batch_size: int = DEFAULT_BATCH_SIZE) -> IngestMetrics:
    """Generate, label, load and ingest every triple of ``blocks`` into ``store``."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    n = config.total_neurons
    for b in blocks:
        b.check(n)
    if sum(b.nnz for b in blocks) == 0:
        return measure_rates(0, 0.0, 0.0, 0.0, workers)

    plan = partition_work(blocks, workers)
    started = time.perf_counter()
    if getattr(store, "process_safe", False) and workers > 1:
        ctx = multiprocessing.get_context("spawn")
        pool = ProcessPoolExecutor(max_workers=workers, mp_context=ctx)
    else:
        pool = ThreadPoolExecutor(max_workers=workers)
    tallies: list[_Tally] = []
    failures: list[str] = []
    with pool:
        futures = [pool.submit(_run_worker, p, config, batch_size, store) for p in plan]
        for w, f in enumerate(futures):
            try:
                tallies.append(f.result())
            except Exception as e:  # worker died outright
                failures.append(f"worker {w}: {type(e).__name__}: {e}")
    wall = time.perf_counter() - started
    failures += [f"worker {w}: {t.error}" for w, t in enumerate(tallies) if t.error]
    metrics = _combine(tallies, workers, wall)
    if failures:
        raise IngestError("ingest failed after {} of {} entries; {}".format(
            metrics.entries, sum(b.nnz for b in blocks), "; ".join(failures)), metrics)
    log.debug("ingested %d entries with %d workers in %.3fs", metrics.entries, workers, wall)
    return metrics
