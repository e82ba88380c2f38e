import pickle
import threading
from concurrent.futures import ProcessPoolExecutor
import multiprocessing

import pytest

from brainschema.store import DurableStore, StoreError, durable_store, memory_store, read_wal


@pytest.fixture(params=["memory", "durable"])
def store(request, tmp_path):
    if request.param == "memory":
        return memory_store()
    return durable_store(tmp_path / "db", sync=False)


def test_scan_is_ordered(store):
    store.put_batch([(b"b", b"2"), (b"a", b"1"), (b"c", b"3")])
    assert list(store.scan_range()) == [(b"a", b"1"), (b"b", b"2"), (b"c", b"3")]
    assert store.count() == 3


def test_half_open_range(store):
    store.put_batch([(b"a", b"1"), (b"ab", b"2"), (b"b", b"3"), (b"ba", b"4")])
    assert [k for k, _ in store.scan_range(b"a", b"b")] == [b"a", b"ab"]
    assert [k for k, _ in store.scan_range(b"ab")] == [b"ab", b"b", b"ba"]


def test_bytewise_order(store):
    keys = [b"a\x00z", b"a/b", b"a", b"\xff", b"A"]
    store.put_batch([(k, b"") for k in keys])
    assert [k for k, _ in store.scan_range()] == sorted(keys)


def test_overwrite_keeps_latest(store):
    store.put_batch([(b"k", b"old")])
    store.flush()
    store.put_batch([(b"k", b"new")])
    assert list(store.scan_range()) == [(b"k", b"new")]
    assert store.count() == 1


def test_concurrent_threads(store):
    def worker(w):
        for b in range(5):
            store.put_batch([(f"{w}-{b}-{i:03d}".encode(), b"v") for i in range(100)])

    threads = [threading.Thread(target=worker, args=(w,)) for w in range(2)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert store.count() == 1_000
    keys = [k for k, _ in store.scan_range()]
    assert keys == sorted(keys) and len(set(keys)) == 1_000


def test_clear(store):
    store.put_batch([(b"x", b"1")])
    store.clear()
    assert store.count() == 0 and list(store.scan_range()) == []


def _child_put(handle, w):
    handle.put_batch([(f"{w}-{i:04d}".encode(), b"v") for i in range(500)])
    handle.flush()
    return w


def test_durable_across_processes(tmp_path):
    store = durable_store(tmp_path / "db", sync=False)
    ctx = multiprocessing.get_context("spawn")
    with ProcessPoolExecutor(2, mp_context=ctx) as pool:
        assert sorted(pool.map(_child_put, [store, store], [0, 1])) == [0, 1]
    assert store.count() == 1_000


def test_durable_pickles_by_path(tmp_path):
    store = durable_store(tmp_path / "db")
    clone = pickle.loads(pickle.dumps(store))
    assert clone.path == store.path and clone._writer != store._writer


def test_small_memtable_makes_many_runs_then_compacts(tmp_path):
    store = DurableStore(tmp_path / "db", memtable_limit=10, sync=False)
    for b in range(10):
        store.put_batch([(f"{i:02d}-{b}".encode(), b"v") for i in range(10)])
    assert len(store._live_runs()) == 10
    assert store.count() == 100
    assert len(store._live_runs()) == 1


def test_recovery_drops_torn_tail(tmp_path):
    path = tmp_path / "db"
    crashed = DurableStore(path, sync=False)
    crashed.put_batch([(b"a", b"1"), (b"b", b"2")])
    crashed.put_batch([(b"c", b"3")])
    wal = crashed._wal_path()
    crashed._wal.close()
    crashed._wal = None
    data = wal.read_bytes()
    wal.write_bytes(data[:-3])  # tear the second frame
    records, torn = read_wal(wal)
    assert torn and records == [(b"a", b"1"), (b"b", b"2")]

    reopened = DurableStore(path)
    assert reopened.torn_tails == 1
    assert list(reopened.scan_range()) == [(b"a", b"1"), (b"b", b"2")]
    assert not list(path.glob("wal-*.log"))


def test_corrupt_run_reports_operation(tmp_path):
    store = durable_store(tmp_path / "db", sync=False)
    store.put_batch([(b"a", b"1")])
    store.flush()
    run = store._live_runs()[0]
    (store.path / run).unlink()
    with pytest.raises(StoreError) as exc:
        list(store.scan_range())
    assert exc.value.operation == "scan_range"
