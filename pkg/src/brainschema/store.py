"""Sorted key-value stores standing in for the database tables.

Both backends order keys bytewise, accept concurrent ``put_batch`` calls and
treat a batch as atomic. ``DurableStore`` on-disk layout, all integers
little-endian:

``wal-<writer>.log``
    Frames of ``u32 payload_len, u32 crc32(payload), payload``; a payload is
    ``u32 count`` then ``count`` records. A short or corrupt trailing frame is
    a torn tail and is dropped on recovery.
``run-<seq>-<writer>.sst``
    ``b"BSRUN001"``, ``u64 count``, then ``count`` records sorted by key with
    unique keys.
``MANIFEST``
    Live run file names, one per line, oldest first. Newer runs win on
    duplicate keys. Rewritten via rename, always under ``LOCK``.

A record is ``u32 key_len, u32 value_len, key, value``.
"""

from __future__ import annotations

import bisect
import fcntl
import heapq
import itertools
import os
import shutil
import struct
import threading
import uuid
import zlib
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Iterator, Optional

Record = tuple[bytes, bytes]

_HDR = struct.Struct("<II")
_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")
RUN_MAGIC = b"BSRUN001"


class StoreError(RuntimeError):
    """I/O failure inside a store; ``operation`` names the failing call."""

    def __init__(self, operation: str, cause: BaseException):
        super().__init__(f"{operation} failed: {cause}")
        self.operation = operation


class MemoryStore:
    """Dict-backed store with a lazily rebuilt sorted key index."""

    process_safe = False

    def __init__(self):
        self._data: dict[bytes, bytes] = {}
        self._keys: Optional[list[bytes]] = None
        self._lock = threading.Lock()

    def put_batch(self, records: Iterable[Record]) -> None:
        batch = dict(records)
        with self._lock:
            self._data.update(batch)
            self._keys = None

    def _sorted(self) -> list[bytes]:
        with self._lock:
            if self._keys is None:
                self._keys = sorted(self._data)
            return self._keys

    def scan_range(self, lo: Optional[bytes] = None, hi: Optional[bytes] = None) -> Iterator[Record]:
        keys = self._sorted()
        i = 0 if lo is None else bisect.bisect_left(keys, lo)
        j = len(keys) if hi is None else bisect.bisect_left(keys, hi)
        data = self._data
        for k in keys[i:j]:
            yield k, data[k]

    def count(self) -> int:
        return len(self._data)

    def clear(self) -> None:
        with self._lock:
            self._data.clear()
            self._keys = None

    def flush(self) -> None:
        pass

    def close(self) -> None:
        pass


def _encode_records(records: Iterable[Record]) -> bytes:
    pack = _HDR.pack
    return b"".join(pack(len(k), len(v)) + k + v for k, v in records)


def _decode_records(buf: bytes, offset: int, count: int) -> Iterator[Record]:
    unpack = _HDR.unpack_from
    for _ in range(count):
        klen, vlen = unpack(buf, offset)
        offset += 8
        k = buf[offset:offset + klen]
        offset += klen
        yield k, buf[offset:offset + vlen]
        offset += vlen


def read_wal(path: Path) -> tuple[list[Record], bool]:
    """Records from intact frames and whether a torn tail was dropped."""
    buf = path.read_bytes()
    out: list[Record] = []
    off = 0
    while off < len(buf):
        if off + 8 > len(buf):
            return out, True
        size, crc = _HDR.unpack_from(buf, off)
        payload = buf[off + 8:off + 8 + size]
        if len(payload) != size or zlib.crc32(payload) != crc:
            return out, True
        (count,) = _U32.unpack_from(payload, 0)
        out.extend(_decode_records(payload, 4, count))
        off += 8 + size
    return out, False


def read_run(path: Path) -> list[Record]:
    buf = path.read_bytes()
    if buf[:8] != RUN_MAGIC:
        raise ValueError(f"{path.name}: not a run file")
    (count,) = _U64.unpack_from(buf, 8)
    return list(_decode_records(buf, 16, count))


class DurableStore:
    """Write-ahead log plus immutable sorted runs in one directory.

    Every ``put_batch`` is framed into this handle's log and fsynced before it
    lands in the memtable. Full memtables become sorted runs. Reads merge the
    live runs; ``compact`` rewrites them into one. Handles pickle by path, so
    worker processes each get their own log and memtable over a shared
    directory.
    """

    process_safe = True

    def __init__(self, path, memtable_limit: int = 250_000, sync: bool = True,
                 recover: bool = True):
        self.path = Path(path)
        self.memtable_limit = memtable_limit
        self.sync = sync
        self.torn_tails = 0
        try:
            self.path.mkdir(parents=True, exist_ok=True)
            (self.path / "LOCK").touch()
            manifest = self.path / "MANIFEST"
            if not manifest.exists():
                with self._locked():
                    if not manifest.exists():
                        manifest.write_text("")
        except OSError as e:
            raise StoreError("open", e) from e
        self._writer = f"{os.getpid()}-{uuid.uuid4().hex[:8]}"
        self._lock = threading.Lock()
        self._mem: dict[bytes, bytes] = {}
        self._wal = None
        self._seq = itertools.count()
        if recover:
            self.recover()

    def __getstate__(self):
        return {"path": str(self.path), "memtable_limit": self.memtable_limit, "sync": self.sync}

    def __setstate__(self, state):
        self.__init__(state["path"], state["memtable_limit"], state["sync"], recover=False)

    @contextmanager
    def _locked(self):
        with open(self.path / "LOCK", "rb") as fh:
            fcntl.flock(fh, fcntl.LOCK_EX)
            try:
                yield
            finally:
                fcntl.flock(fh, fcntl.LOCK_UN)

    def _wal_path(self) -> Path:
        return self.path / f"wal-{self._writer}.log"

    def _live_runs(self) -> list[str]:
        return [ln for ln in (self.path / "MANIFEST").read_text().splitlines() if ln]

    def _write_manifest(self, runs: list[str]) -> None:
        tmp = self.path / f"MANIFEST.{self._writer}.tmp"
        tmp.write_text("".join(f"{r}\n" for r in runs))
        os.replace(tmp, self.path / "MANIFEST")

    def _write_run(self, records: list[Record]) -> str:
        name = f"run-{next(self._seq):08d}-{self._writer}-{uuid.uuid4().hex[:6]}.sst"
        tmp = self.path / (name + ".tmp")
        with open(tmp, "wb") as fh:
            fh.write(RUN_MAGIC + _U64.pack(len(records)))
            fh.write(_encode_records(records))
            fh.flush()
            if self.sync:
                os.fsync(fh.fileno())
        os.replace(tmp, self.path / name)
        return name

    def _flush_locked(self) -> None:
        if self._mem:
            name = self._write_run(sorted(self._mem.items()))
            with self._locked():
                self._write_manifest(self._live_runs() + [name])
            self._mem = {}
        if self._wal is not None:
            self._wal.close()
            self._wal = None
            self._wal_path().unlink(missing_ok=True)

    def put_batch(self, records: Iterable[Record]) -> None:
        batch = list(records)
        if not batch:
            return
        payload = _U32.pack(len(batch)) + _encode_records(batch)
        frame = _HDR.pack(len(payload), zlib.crc32(payload)) + payload
        try:
            with self._lock:
                if self._wal is None:
                    self._wal = open(self._wal_path(), "ab")
                self._wal.write(frame)
                self._wal.flush()
                if self.sync:
                    os.fsync(self._wal.fileno())
                self._mem.update(batch)
                if len(self._mem) >= self.memtable_limit:
                    self._flush_locked()
        except OSError as e:
            raise StoreError("put_batch", e) from e

    def flush(self) -> None:
        try:
            with self._lock:
                self._flush_locked()
        except OSError as e:
            raise StoreError("flush", e) from e

    def recover(self) -> int:
        """Turn logs left behind by dead writers into runs. Returns records recovered."""
        recovered = 0
        try:
            with self._locked():
                runs = self._live_runs()
                for wal in sorted(self.path.glob("wal-*.log")):
                    if wal == self._wal_path():
                        continue
                    records, torn = read_wal(wal)
                    self.torn_tails += torn
                    if records:
                        runs.append(self._write_run(sorted(dict(records).items())))
                        recovered += len(records)
                    self._write_manifest(runs)
                    wal.unlink()
        except OSError as e:
            raise StoreError("recover", e) from e
        return recovered

    def _merged(self, runs: list[str], lo, hi) -> Iterator[Record]:
        # Tag each record with -run_age so heapq puts the newest duplicate first.
        streams = []
        for age, name in enumerate(runs):
            recs = read_run(self.path / name)
            if lo is not None:
                recs = recs[bisect.bisect_left(recs, (lo,)):]
            streams.append(((k, -age, v) for k, v in recs))
        last = None
        for k, _, v in heapq.merge(*streams):
            if k == last:
                continue
            if hi is not None and k >= hi:
                return
            last = k
            yield k, v

    def scan_range(self, lo: Optional[bytes] = None, hi: Optional[bytes] = None) -> Iterator[Record]:
        self.flush()
        try:
            with self._locked():
                runs = self._live_runs()
            yield from self._merged(runs, lo, hi)
        except OSError as e:
            raise StoreError("scan_range", e) from e

    def compact(self) -> None:
        """Merge every live run into one."""
        self.flush()
        try:
            with self._locked():
                runs = self._live_runs()
                if len(runs) <= 1:
                    return
                name = self._write_run(list(self._merged(runs, None, None)))
                self._write_manifest([name])
                for r in runs:
                    (self.path / r).unlink(missing_ok=True)
        except OSError as e:
            raise StoreError("compact", e) from e

    def count(self) -> int:
        self.compact()
        try:
            with self._locked():
                runs = self._live_runs()
                if not runs:
                    return 0
                with open(self.path / runs[0], "rb") as fh:
                    head = fh.read(16)
            return _U64.unpack_from(head, 8)[0]
        except OSError as e:
            raise StoreError("count", e) from e

    def clear(self) -> None:
        try:
            with self._lock:
                self._mem = {}
                if self._wal is not None:
                    self._wal.close()
                    self._wal = None
                with self._locked():
                    for p in self.path.iterdir():
                        if p.name not in ("LOCK", "MANIFEST"):
                            p.unlink()
                    self._write_manifest([])
        except OSError as e:
            raise StoreError("clear", e) from e

    def close(self) -> None:
        self.flush()

    def destroy(self) -> None:
        self.close()
        shutil.rmtree(self.path, ignore_errors=True)


def memory_store() -> MemoryStore:
    return MemoryStore()


def durable_store(path, **kwargs) -> DurableStore:
    return DurableStore(path, **kwargs)
