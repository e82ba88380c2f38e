"""``brainschema`` command line.

Exit status: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import bench
from .codec import MAX_DEPTH, RegionStream, get_codec
from .config import BENCH_KEYS, build_schema, parse_count, read_config_file
from .generate import BlockSpec, generate_block, label_triples, write_triples
from .schema import TABLE1_COLUMNS, canonical_configs, derive_cortex_row

log = logging.getLogger("brainschema")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _count_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(parse_count(p) for p in text.split(",") if p.strip())
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _count(text: str) -> int:
    try:
        return parse_count(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--schema", choices=("cortex", "cerebellum"))
    common.add_argument("--seed", type=_count)
    common.add_argument("--out", help="write data here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="brainschema", description="Brain-region naming schema, "
                "sparse connectome generation and ingest benchmarks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("table1", parents=[common], help="derived cortex ranges table")
    t.add_argument("--neurons", type=_count)
    t.add_argument("--columns", type=_count)
    t.add_argument("--microcolumn-size", type=_count, help="neurons per microcolumn")
    t.add_argument("--csv", action="store_true", help="CSV instead of aligned text")

    r = sub.add_parser("regions", parents=[common], help="list or count region labels")
    r.add_argument("--depth", type=int, default=MAX_DEPTH)
    r.add_argument("--start", type=_count, default=0)
    r.add_argument("--limit", type=_count, default=None)
    r.add_argument("--count", action="store_true", help="print only the number of regions")

    lb = sub.add_parser("label", parents=[common], help="qualified name of a neuron index")
    lb.add_argument("index", type=_count)

    rs = sub.add_parser("resolve", parents=[common], help="index range of a label")
    rs.add_argument("label")

    g = sub.add_parser("gen", parents=[common], help="write one block of labelled triples")
    g.add_argument("--dim", type=_count, default=1000)
    g.add_argument("--sparsity", type=float, default=1e-3)
    g.add_argument("--block-row", type=_count, default=0)
    g.add_argument("--block-col", type=_count, default=0)

    b = sub.add_parser("bench", parents=[common], help="ingest sweep over entries x workers")
    b.add_argument("--entries", type=_count_list)
    b.add_argument("--workers", type=_count_list)
    b.add_argument("--trials", type=_count)
    b.add_argument("--backend", choices=("mem", "disk"))
    b.add_argument("--batch-size", type=_count)
    b.add_argument("--csv", help="write CSV rows here")
    b.add_argument("--plot", help="write the SVG chart here")
    b.add_argument("--figure", help="write a matplotlib figure here (png, pdf, svg)")
    b.add_argument("--by-entries", action="store_true", help="one series per entry count")
    b.add_argument("--paper-preset", action="store_true",
                   help="50M/100M/500M entries x 1..18 workers")
    b.add_argument("--store-dir", help="directory for the disk backend")
    b.add_argument("--dry-run", action="store_true", help="print the plan and exit")
    return p


def _file_values(args) -> dict:
    return read_config_file(args.config) if args.config else {}


def _schema(args, values: Optional[dict] = None):
    values = dict(values if values is not None else _file_values(args))
    return build_schema(values, args.schema)


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _table1(args) -> int:
    values = _file_values(args)
    overrides = {k: v for k, v in (("total_neurons", args.neurons), ("total_columns", args.columns),
                                   ("neurons_per_microcolumn", args.microcolumn_size))
                 if v is not None}
    if overrides or any(k in values for k in ("total_neurons", "total_columns")):
        values.update(overrides)
        values.pop("schema", None)
        configs = [build_schema(values, "cortex")]
    else:
        configs = canonical_configs()
    header = TABLE1_COLUMNS + ("note",)
    lines = []
    for cfg in configs:
        d = derive_cortex_row(cfg)
        notes = [f"erratum {x}" for x in d.discrepancies]
        if not d.exact:
            notes.append("inexact division")
        lines.append([d.as_row()[c] for c in TABLE1_COLUMNS] + ["; ".join(notes)])
    if args.csv:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(lines)
        text = buf.getvalue()
    else:
        cells = [list(header)] + [[f"{v:,}" if isinstance(v, int) else v for v in ln] for ln in lines]
        widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
        text = "".join("  ".join(c.rjust(w) if i < len(header) - 1 else c
                                 for i, (c, w) in enumerate(zip(row, widths))).rstrip() + "\n"
                       for row in cells)
    _emit(args, text)
    return 0


def _regions(args) -> int:
    cfg = _schema(args)
    if not 1 <= args.depth <= MAX_DEPTH:
        raise UsageError(f"--depth must be in 1..{MAX_DEPTH}")
    stream = RegionStream(get_codec(cfg), args.depth)
    if args.count:
        _emit(args, f"{len(stream)}\n")
        return 0
    stop = len(stream) if args.limit is None else min(len(stream), args.start + args.limit)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        for k in range(args.start, stop):
            out.write(f"{stream[k]}\n")
    finally:
        if args.out:
            out.close()
    return 0


def _label(args) -> int:
    cfg = _schema(args)
    _emit(args, get_codec(cfg).qualified_name(args.index) + "\n")
    return 0


def _resolve(args) -> int:
    codec = get_codec(_schema(args))
    if "#" in args.label:
        _emit(args, f"{codec.resolve_qualified(args.label)}\n")
    else:
        lo, hi = codec.region_range(args.label)
        _emit(args, f"[{lo},{hi})\n")
    return 0


def _gen(args) -> int:
    cfg = _schema(args)
    seed = args.seed if args.seed is not None else _file_values(args).get("seed", 0)
    spec = BlockSpec(args.block_row, args.block_col, args.dim, args.sparsity, seed)
    spec.check(cfg.total_neurons)
    triples = label_triples(generate_block(spec), spec, cfg)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            n = write_triples(triples, fh)
    else:
        n = write_triples(triples, sys.stdout)
    log.info("wrote %d triples", n)
    return 0


def plan_from_args(args) -> bench.BenchPlan:
    values = _file_values(args)
    kw = {k: values[k] for k in BENCH_KEYS if k in values}
    if "backend" in kw:
        kw["backend"] = {"mem": "memory", "disk": "durable"}.get(kw["backend"], kw["backend"])
    if args.paper_preset:
        kw["entry_counts"], kw["worker_counts"] = bench.PRESET_ENTRIES, bench.PRESET_WORKERS
    for flag, key in (("entries", "entry_counts"), ("workers", "worker_counts"),
                      ("trials", "trials"), ("seed", "seed"), ("batch_size", "batch_size")):
        if getattr(args, flag) is not None:
            kw[key] = getattr(args, flag)
    if args.backend:
        kw["backend"] = {"mem": "memory", "disk": "durable"}[args.backend]
    plan = bench.BenchPlan(**kw)
    try:
        plan.validate()
    except ValueError as e:
        raise UsageError(str(e)) from None
    return plan


def _bench(args) -> int:
    plan = plan_from_args(args)
    if args.dry_run:
        print(f"entries: {','.join(map(str, plan.entry_counts))}")
        print(f"workers: {','.join(map(str, plan.worker_counts))}")
        print(f"trials: {plan.trials}")
        print(f"backend: {plan.backend}")
        print(f"seed: {plan.seed}")
        print(f"cells: {len(plan.cells())}")
        return 0
    values = {k: v for k, v in _file_values(args).items() if k not in BENCH_KEYS}
    cfg = build_schema(values, args.schema)
    try:
        rows = bench.run_sweep(plan, cfg, args.store_dir,
                               progress=lambda r: log.info("%s", r))
    except bench.SweepError as e:
        if e.rows:
            _write_bench_outputs(args, e.rows)
        raise
    _write_bench_outputs(args, rows)
    for w in bench.smoke_checks(rows):
        print(f"warning: {w}", file=sys.stderr)
    return 0


def _write_bench_outputs(args, rows) -> None:
    text = bench.emit_csv(rows)
    target = args.csv or args.out
    if target:
        Path(target).write_text(text)
    else:
        sys.stdout.write(text)
    if args.plot:
        Path(args.plot).write_text(bench.emit_plot(rows, by_entries=args.by_entries))
    if args.figure:
        bench.render_figure(rows, args.figure, by_entries=args.by_entries)


COMMANDS = {"table1": _table1, "regions": _regions, "label": _label, "resolve": _resolve,
            "gen": _gen, "bench": _bench}


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 1
    except SystemExit as e:  # --help
        return 0 if e.code in (0, None) else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"brainschema: error: {e}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 2
    except Exception as e:
        print(f"brainschema: {args.command} failed: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
