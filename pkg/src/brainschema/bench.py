"""Benchmark sweeps over entry counts and worker counts, plus their reports."""

from __future__ import annotations

import csv
import io
import logging
import shutil
import tempfile
import time
from dataclasses import dataclass, fields
from pathlib import Path
from statistics import fmean
from typing import Optional, Sequence
from xml.sax.saxutils import escape

from .generate import plan_blocks
from .ingest import DEFAULT_BATCH_SIZE, run_ingest
from .schema import CortexConfig, SchemaConfig
from .store import durable_store, memory_store

log = logging.getLogger(__name__)

PRESET_ENTRIES = (50_000_000, 100_000_000, 500_000_000)
PRESET_WORKERS = (1, 2, 4, 6, 8, 10, 12, 14, 16, 18)
DESK_ENTRIES = (500_000, 1_000_000, 5_000_000)
DESK_WORKERS = (1, 2, 4, 8)
BACKENDS = ("memory", "durable")

RATES = ("for_rate", "load_rate", "ingest_rate")
RATE_TITLES = {"for_rate": "for (label)", "load_rate": "load", "ingest_rate": "ingest"}
SERIES_COLORS = {"for_rate": "#1f77b4", "load_rate": "#2ca02c", "ingest_rate": "#d62728"}


@dataclass
class BenchPlan:
    entry_counts: tuple[int, ...] = DESK_ENTRIES
    worker_counts: tuple[int, ...] = DESK_WORKERS
    trials: int = 3
    backend: str = "memory"
    seed: int = 0
    batch_size: int = DEFAULT_BATCH_SIZE

    @classmethod
    def full_scale(cls, **overrides) -> "BenchPlan":
        return cls(entry_counts=PRESET_ENTRIES, worker_counts=PRESET_WORKERS, **overrides)

    def validate(self) -> None:
        if not self.entry_counts or not self.worker_counts:
            raise ValueError("entry and worker lists must be non-empty")
        for name, values in (("entries", self.entry_counts), ("workers", self.worker_counts)):
            if any(v < 1 for v in values):
                raise ValueError(f"{name} must all be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}, got {self.backend!r}")

    def cells(self) -> list[tuple[int, int, int]]:
        return [(e, w, t) for e in self.entry_counts for w in self.worker_counts
                for t in range(1, self.trials + 1)]


@dataclass
class BenchResultRow:
    entries: int
    workers: int
    trial: int
    for_rate: Optional[float]
    load_rate: Optional[float]
    ingest_rate: Optional[float]
    total_seconds: float


CSV_HEADER = tuple(f.name for f in fields(BenchResultRow))


class SweepError(RuntimeError):
    def __init__(self, message: str, rows: list[BenchResultRow]):
        super().__init__(message)
        self.rows = rows


def run_sweep(plan: BenchPlan, config: Optional[SchemaConfig] = None,
              store_dir: Optional[str] = None, progress=None) -> list[BenchResultRow]:
    """One row per (entries, workers, trial), store cleared before each cell."""
    plan.validate()
    config = config or CortexConfig()
    rows: list[BenchResultRow] = []
    tmp = None
    if plan.backend == "durable":
        if store_dir is None:
            tmp = store_dir = tempfile.mkdtemp(prefix="brainschema-store-")
        store = durable_store(Path(store_dir))
    else:
        store = memory_store()
    try:
        blocks_by_entries = {e: plan_blocks(e, plan.seed) for e in plan.entry_counts}
        for entries, workers, trial in plan.cells():
            store.clear()
            t0 = time.perf_counter()
            try:
                m = run_ingest(blocks_by_entries[entries], config, workers, store, plan.batch_size)
            except Exception as e:
                raise SweepError(f"cell entries={entries} workers={workers} trial={trial}: {e}",
                                 rows) from e
            row = BenchResultRow(entries, workers, trial, m.for_rate, m.load_rate, m.ingest_rate,
                                 time.perf_counter() - t0)
            rows.append(row)
            if progress:
                progress(row)
    finally:
        store.clear()
        if tmp:
            shutil.rmtree(tmp, ignore_errors=True)
    return rows


def _fmt(v) -> str:
    if v is None:
        return ""
    return repr(float(v)) if isinstance(v, float) else str(v)


def emit_csv(rows: Sequence[BenchResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([_fmt(getattr(r, name)) for name in CSV_HEADER])
    return buf.getvalue()


def parse_csv(text: str) -> list[BenchResultRow]:
    reader = csv.reader(io.StringIO(text))
    header = tuple(next(reader))
    if header != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header}")
    out = []
    for rec in reader:
        if not rec:
            continue
        e, w, t, fr, lr, ir, total = rec
        out.append(BenchResultRow(int(e), int(w), int(t),
                                  *(float(x) if x else None for x in (fr, lr, ir)),
                                  float(total)))
    return out


def rate_series(rows: Sequence[BenchResultRow], by_entries: bool = False) -> dict:
    """Mean rate per worker count, keyed by rate name (or ``(rate, entries)``).

    Unmeasurable rates are left out of the means.
    """
    groups: dict = {}
    for r in rows:
        for rate in RATES:
            v = getattr(r, rate)
            if v is None:
                continue
            key = (rate, r.entries) if by_entries else rate
            groups.setdefault(key, {}).setdefault(r.workers, []).append(v)
    return {k: sorted((w, fmean(vs)) for w, vs in pts.items()) for k, pts in groups.items()}


def emit_plot(rows: Sequence[BenchResultRow], by_entries: bool = False,
              width: int = 720, height: int = 450, title: str = "Mean phase rates per worker count") -> str:
    """SVG line chart: one ``polyline`` per rate series, rate against workers."""
    if not rows:
        raise ValueError("cannot plot zero rows")
    series = rate_series(rows, by_entries)
    if not series:
        raise ValueError("no measurable rates to plot")
    ml, mr, mt, mb = 90, 170, 40, 60
    pw, ph = width - ml - mr, height - mt - mb
    xs = sorted({w for pts in series.values() for w, _ in pts})
    ymax = max(v for pts in series.values() for _, v in pts) or 1.0
    xmin, xmax = xs[0], xs[-1]
    xspan = (xmax - xmin) or 1

    def px(w):
        return ml + (w - xmin) / xspan * pw if xmax != xmin else ml + pw / 2

    def py(v):
        return mt + ph - v / (ymax * 1.05) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{ml + pw / 2:.1f}" y="{mt - 15}" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>',
    ]
    for w in xs:
        x = px(w)
        out.append(f'<line x1="{x:.1f}" y1="{mt + ph}" x2="{x:.1f}" y2="{mt + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.1f}" y="{mt + ph + 18}" text-anchor="middle">{w}</text>')
    for i in range(6):
        v = ymax * 1.05 * i / 5
        y = py(v)
        out.append(f'<line x1="{ml - 5}" y1="{y:.1f}" x2="{ml + pw}" y2="{y:.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{ml - 8}" y="{y + 4:.1f}" text-anchor="end">{v:.3g}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 15}" text-anchor="middle">workers</text>')
    out.append(f'<text transform="translate(20 {mt + ph / 2:.1f}) rotate(-90)" '
               f'text-anchor="middle">entries per second</text>')

    palette = ["#1f77b4", "#2ca02c", "#d62728", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"]
    for i, (key, pts) in enumerate(sorted(series.items(), key=lambda kv: str(kv[0]))):
        rate = key[0] if by_entries else key
        name = RATE_TITLES[rate] + (f" @ {key[1]:,}" if by_entries else "")
        color = palette[i % len(palette)] if by_entries else SERIES_COLORS[rate]
        coords = " ".join(f"{px(w):.2f},{py(v):.2f}" for w, v in pts)
        out.append(f'<g class="series" data-series="{escape(name)}">')
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
        for w, v in pts:
            out.append(f'<circle cx="{px(w):.2f}" cy="{py(v):.2f}" r="3.5" fill="{color}">'
                       f'<title>{escape(name)}: workers={w} rate={v:.6g}</title></circle>')
        out.append("</g>")
        ly = mt + 10 + 20 * i
        lx = ml + pw + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_figure(rows: Sequence[BenchResultRow], path, by_entries: bool = False) -> Path:
    """Matplotlib rendering of the same series; format follows the file suffix."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if not rows:
        raise ValueError("cannot plot zero rows")
    series = rate_series(rows, by_entries)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for key, pts in sorted(series.items(), key=lambda kv: str(kv[0])):
        rate = key[0] if by_entries else key
        label = RATE_TITLES[rate] + (f" @ {key[1]:,}" if by_entries else "")
        ws, vs = zip(*pts)
        ax.plot(ws, vs, marker="o", label=label,
                color=None if by_entries else SERIES_COLORS[rate])
    ax.set_xlabel("workers")
    ax.set_ylabel("entries per second")
    ax.set_title("Mean phase rates per worker count")
    ax.set_xticks(sorted({r.workers for r in rows}))
    ax.set_ylim(bottom=0)
    ax.grid(True, alpha=0.3)
    ax.legend(frameon=False)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path)
    plt.close(fig)
    return path


def smoke_checks(rows: Sequence[BenchResultRow], cores: Optional[int] = None) -> list[str]:
    """Hardware-dependent expectations; returns warnings, never raises."""
    import os

    cores = cores if cores is not None else os.cpu_count() or 1
    warnings = []
    series = rate_series(rows)
    ingest = dict(series.get("ingest_rate", []))
    load = dict(series.get("load_rate", []))
    if 1 in ingest and 8 in ingest:
        ratio = ingest[8] / ingest[1]
        if cores < 4:
            warnings.append(f"scaling check skipped: {cores} core(s) < 4 (ingest 8w/1w = {ratio:.2f})")
        elif ratio < 1.5:
            warnings.append(f"ingest rate at 8 workers is {ratio:.2f}x the 1-worker rate (< 1.5x)")
    for w in sorted(ingest):
        if w in load and load[w] < ingest[w]:
            warnings.append(f"workers={w}: load rate {load[w]:.4g} < ingest rate {ingest[w]:.4g}")
    return warnings
