import math

import pytest

from brainschema.codec import get_codec
from brainschema.generate import BlockSpec, block_arrays, chain_blocks, plan_blocks
from brainschema.ingest import (IngestError, decode_key, decode_weight, encode_key,
                                measure_rates, partition_work, run_ingest)
from brainschema.store import durable_store, memory_store


def test_measure_rates_examples():
    m = measure_rates(500, 0.5, 1.0, 1.0)
    assert m.for_rate == 1_000
    m = measure_rates(1_000, 1, 2, 4)
    assert (m.for_rate, m.load_rate, m.ingest_rate) == (1_000, 500, 250)
    m = measure_rates(0, 0, 0, 0)
    assert (m.for_rate, m.load_rate, m.ingest_rate) == (0, 0, 0)


def test_zero_duration_is_unmeasurable_not_zero():
    m = measure_rates(10, 0.0, 1.0, 1.0)
    assert m.for_rate is None and m.load_rate == 10


def test_negative_duration_rejected():
    with pytest.raises(ValueError):
        measure_rates(1, -1.0, 1.0, 1.0)


def test_key_encoding_round_trip():
    key = encode_key("left/region_01/1/1/II#1", "right/region_02/2/2/VI#2")
    assert key.count(b"\x00") == 1
    assert decode_key(key) == ("left/region_01/1/1/II#1", "right/region_02/2/2/VI#2")


@pytest.mark.parametrize("workers", [1, 2, 3, 7])
def test_partition_covers_every_triple_once(workers):
    blocks = [BlockSpec(0, 1, 10, 0.3), BlockSpec(1, 2, 10, 0.05), BlockSpec(2, 3, 10, 0.41)]
    plan = partition_work(blocks, workers)
    seen = [(p.spec, i) for pieces in plan for p in pieces for i in range(p.lo, p.hi)]
    expected = [(b, i) for b in blocks for i in range(b.nnz)]
    assert seen == expected
    sizes = [sum(p.hi - p.lo for p in pieces) for pieces in plan]
    assert max(sizes) - min(sizes) <= 1


def test_single_block_memory(canonical):
    store = memory_store()
    m = run_ingest([BlockSpec(0, 1, 100, 0.1, seed=1)], canonical, 1, store)
    assert m.entries == 1_000 and store.count() == 1_000
    assert m.for_seconds > 0 and m.load_seconds > 0 and m.ingest_seconds > 0
    assert math.isclose(m.ingest_rate, m.entries / m.ingest_seconds, rel_tol=1e-12)


def test_empty_run_leaves_store_untouched(canonical):
    store = memory_store()
    m = run_ingest([], canonical, 4, store)
    assert m.entries == 0 and (m.for_rate, m.load_rate, m.ingest_rate) == (0, 0, 0)
    assert store.count() == 0


def _oracle_records(blocks, cfg):
    codec = get_codec(cfg)
    out = {}
    for b in blocks:
        rows, cols, weights = block_arrays(b)
        for r, c, w in zip(rows.tolist(), cols.tolist(), weights.tolist()):
            key = encode_key(codec.qualified_name(b.row_offset + r),
                             codec.qualified_name(b.col_offset + c))
            out[key] = w
    return sorted(out.items())


@pytest.mark.parametrize("backend", ["memory", "durable"])
def test_contents_independent_of_workers_and_batches(backend, tmp_path, canonical):
    blocks = chain_blocks(3, 50, 0.2, seed=17)
    expected = _oracle_records(blocks, canonical)
    contents = []
    for i, (workers, batch) in enumerate([(1, 10_000), (4, 7), (3, 100)]):
        store = memory_store() if backend == "memory" else durable_store(tmp_path / f"s{i}", sync=False)
        m = run_ingest(blocks, canonical, workers, store, batch_size=batch)
        assert m.entries == sum(b.nnz for b in blocks) == store.count()
        contents.append([(k, decode_weight(v)) for k, v in store.scan_range()])
    assert contents[0] == expected
    assert contents[0] == contents[1] == contents[2]


def test_invalid_arguments(canonical):
    with pytest.raises(ValueError):
        run_ingest([], canonical, 0, memory_store())
    with pytest.raises(ValueError):
        run_ingest([], canonical, 1, memory_store(), batch_size=0)


def test_block_outside_neuron_space(tiny):
    with pytest.raises(ValueError):
        run_ingest([BlockSpec(1, 0, 100, 0.1)], tiny, 1, memory_store())


class FlakyStore:
    process_safe = False

    def __init__(self, fail_after):
        self.inner = memory_store()
        self.calls = 0
        self.fail_after = fail_after

    def put_batch(self, records):
        self.calls += 1
        if self.calls > self.fail_after:
            raise OSError("disk full")
        self.inner.put_batch(records)

    def flush(self):
        pass


def test_store_failure_reports_partial_progress(canonical):
    store = FlakyStore(fail_after=2)
    with pytest.raises(IngestError) as exc:
        run_ingest(plan_blocks(1_000, 3), canonical, 1, store, batch_size=100)
    assert exc.value.partial.entries == 200
    assert store.inner.count() == 200
    assert "disk full" in str(exc.value)
