"""Deterministic sparse weight-matrix blocks and their labelled triples."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, NamedTuple, Optional

import numpy as np

from .codec import get_codec
from .schema import SchemaConfig


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class BlockSpec:
    """One ``dim`` x ``dim`` tile of the global neuron-by-neuron matrix."""

    block_row: int
    block_col: int
    dim: int
    sparsity: float
    seed: int = 0

    @property
    def nnz(self) -> int:
        return round(self.dim * self.dim * self.sparsity)

    @property
    def row_offset(self) -> int:
        return self.block_row * self.dim

    @property
    def col_offset(self) -> int:
        return self.block_col * self.dim

    def check(self, total_neurons: Optional[int] = None) -> None:
        if not isinstance(self.dim, int) or self.dim <= 0:
            raise SpecError(f"dim must be a positive integer, got {self.dim!r}")
        if not (0.0 < self.sparsity <= 1.0) or math.isnan(self.sparsity):
            raise SpecError(f"sparsity must be in (0, 1], got {self.sparsity!r}")
        if self.block_row < 0 or self.block_col < 0:
            raise SpecError("block coordinates must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise SpecError(f"seed must fit in 64 bits, got {self.seed!r}")
        if total_neurons is not None:
            for axis, off in (("row", self.row_offset), ("col", self.col_offset)):
                if off + self.dim > total_neurons:
                    raise SpecError(
                        f"block {axis} span [{off}, {off + self.dim}) exceeds {total_neurons} neurons")


class Triple(NamedTuple):
    row_label: str
    col_label: str
    weight: float


def floyd_sample(rng: np.random.Generator, population: int, k: int) -> np.ndarray:
    """``k`` distinct integers from ``range(population)`` by Floyd's algorithm.

    Returned in ascending order. O(k) time and memory regardless of the
    population size.
    """
    if not 0 <= k <= population:
        raise SpecError(f"cannot draw {k} distinct values from {population}")
    if k == 0:
        return np.empty(0, dtype=np.int64)
    highs = np.arange(population - k, population, dtype=np.int64)
    draws = rng.integers(0, highs, endpoint=True)
    chosen: set[int] = set()
    add = chosen.add
    for j, t in zip(highs.tolist(), draws.tolist()):
        add(j if t in chosen else t)
    out = np.fromiter(chosen, dtype=np.int64, count=k)
    out.sort()
    return out


def block_arrays(spec: BlockSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Local rows, local cols and weights of a block, in row-major order."""
    spec.check()
    rng = np.random.default_rng(spec.seed)
    pos = floyd_sample(rng, spec.dim * spec.dim, spec.nnz)
    rows, cols = np.divmod(pos, spec.dim)
    # 1 - U[0, 1) is uniform on (0, 1] and never zero.
    weights = 1.0 - rng.random(pos.size)
    return rows, cols, weights


def generate_block(spec: BlockSpec) -> Iterator[tuple[int, int, float]]:
    rows, cols, weights = block_arrays(spec)
    return zip(rows.tolist(), cols.tolist(), weights.tolist())


class NeuronNamer:
    """Memoizing ``index -> label#slot`` lookup; blocks revisit rows and cols."""

    def __init__(self, config: SchemaConfig, limit: int = 1 << 20):
        self.codec = get_codec(config)
        self.limit = limit
        self._memo: dict[int, str] = {}

    def __call__(self, index: int) -> str:
        name = self._memo.get(index)
        if name is None:
            if len(self._memo) >= self.limit:
                self._memo.clear()
            name = self._memo[index] = self.codec.qualified_name(index)
        return name


def label_triples(stream: Iterable[tuple[int, int, float]], spec: BlockSpec,
                  config: SchemaConfig, namer: Optional[NeuronNamer] = None) -> Iterator[Triple]:
    """Map local block coordinates to qualified neuron names, order preserved."""
    namer = namer or NeuronNamer(config)
    n = namer.codec.total_neurons
    r0, c0 = spec.row_offset, spec.col_offset
    for r, c, w in stream:
        gr, gc = r0 + r, c0 + c
        if gr >= n or gc >= n:
            raise IndexError(f"global index ({gr}, {gc}) outside [0, {n})")
        yield Triple(namer(gr), namer(gc), w)


def chain_blocks(count: int, dim: int, sparsity: float, seed: int) -> list[BlockSpec]:
    """Blocks (i, i+1) for i < count: one off-diagonal link per layer."""
    seeds = np.random.SeedSequence(seed).generate_state(max(count, 1), dtype=np.uint64)
    return [BlockSpec(i, i + 1, dim, sparsity, int(seeds[i])) for i in range(count)]


def plan_blocks(entries: int, seed: int, dim: int = 10_000, per_block: int = 100_000) -> list[BlockSpec]:
    """Chain of blocks holding exactly ``entries`` nonzeros in total."""
    if entries < 0:
        raise SpecError("entries must be non-negative")
    if per_block > dim * dim:
        raise SpecError("per_block exceeds dim^2")
    full, rest = divmod(entries, per_block)
    blocks = chain_blocks(full + (1 if rest else 0), dim, per_block / (dim * dim), seed)
    if rest:
        last = blocks[-1]
        blocks[-1] = BlockSpec(last.block_row, last.block_col, dim, rest / (dim * dim), last.seed)
    assert sum(b.nnz for b in blocks) == entries
    return blocks


def write_triples(triples: Iterable[Triple], fh: IO[str]) -> int:
    n = 0
    for t in triples:
        fh.write(f"{t.row_label}\t{t.col_label}\t{t.weight!r}\n")
        n += 1
    return n


def read_triples(fh: IO[str]) -> Iterator[Triple]:
    for lineno, line in enumerate(fh, 1):
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 3 tab-separated fields, got {len(parts)}")
        yield Triple(parts[0], parts[1], float(parts[2]))
