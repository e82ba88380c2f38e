import csv
import io
from pathlib import Path

import pytest

from brainschema.bench import parse_csv
from brainschema.cli import build_parser, cli_main, plan_from_args
from brainschema.generate import read_triples

TINY = str(Path(__file__).resolve().parents[1] / "configs" / "tiny.cfg")


def run(capsys, *argv):
    code = cli_main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_table1_single_row(capsys):
    code, out, _ = run(capsys, "table1", "--neurons", "21000000000", "--columns", "210000", "--csv")
    assert code == 0
    (row,) = list(csv.DictReader(io.StringIO(out)))
    assert row["columns_per_region"] == "3387"
    assert row["microcolumns_per_region"] == "3387096"
    assert row["regions_microcolumns"] == "1050000000"
    assert row["neurons_per_region_microcolumns"] == "20"
    assert row["note"] == ""


def test_table1_all_rows_flag_erratum(capsys):
    code, out, _ = run(capsys, "table1", "--csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 8
    assert rows[7]["microcolumns_per_column"] == "2600"
    assert "printed 2,100" in rows[7]["note"]
    assert all(r["note"] == "" for r in rows[:7])


def test_table1_text(capsys):
    code, out, _ = run(capsys, "table1")
    assert code == 0 and "1,050,000,000" in out and "52,000" in out


def test_resolve(capsys):
    assert run(capsys, "resolve", "left/region_01/1/1/II", "--config", TINY)[:2] == (0, "[0,2)\n")
    assert run(capsys, "resolve", "left", "--config", TINY)[1] == "[0,80)\n"
    assert run(capsys, "resolve", "right/region_02/2/2/VI#2", "--config", TINY)[1] == "159\n"


def test_resolve_bad_label_is_runtime_error(capsys):
    code, out, err = run(capsys, "resolve", "left/region_01/9/1/II", "--config", TINY)
    assert code == 2 and out == "" and "component 3" in err


def test_label(capsys):
    assert run(capsys, "label", "159", "--config", TINY)[1] == "right/region_02/2/2/VI#2\n"
    assert run(capsys, "label", "0")[1] == "left/region_01/1/1/II#1\n"


def test_regions(capsys):
    assert run(capsys, "regions", "--depth", "1", "--config", TINY)[1] == "left\nright\n"
    assert run(capsys, "regions", "--count")[1] == "1050000000\n"
    assert run(capsys, "regions", "--count", "--schema", "cerebellum")[1] == "1300000200\n"
    out = run(capsys, "regions", "--limit", "2", "--start", "5")[1]
    assert out.splitlines() == ["left/region_01/1/2/II", "left/region_01/1/2/III"]


def test_gen_writes_triples(tmp_path, capsys):
    path = tmp_path / "t.tsv"
    code, _, _ = run(capsys, "gen", "--dim", "40", "--sparsity", "0.1", "--seed", "3",
                     "--config", TINY, "--out", str(path))
    assert code == 0
    with open(path) as fh:
        triples = list(read_triples(fh))
    assert len(triples) == 160
    code, out, _ = run(capsys, "gen", "--dim", "40", "--sparsity", "0.1", "--seed", "3",
                       "--config", TINY)
    assert out == path.read_text()


def test_gen_outside_space(capsys):
    code, _, err = run(capsys, "gen", "--dim", "100", "--block-row", "2", "--config", TINY)
    assert code == 2 and "exceeds" in err


def test_bench_happy_path(tmp_path, capsys):
    csv_path, svg_path, fig = tmp_path / "out.csv", tmp_path / "out.svg", tmp_path / "fig.png"
    code, _, _ = run(capsys, "bench", "--entries", "1000", "--workers", "1,2", "--trials", "1",
                     "--csv", str(csv_path), "--plot", str(svg_path), "--figure", str(fig))
    assert code == 0
    rows = parse_csv(csv_path.read_text())
    assert [(r.entries, r.workers) for r in rows] == [(1000, 1), (1000, 2)]
    assert svg_path.read_text().count("<polyline") == 3
    assert fig.stat().st_size > 0


@pytest.mark.parametrize("argv", [
    ["bench", "--bogus"],
    ["nosuch"],
    [],
    ["bench", "--backend", "tape"],
    ["bench", "--workers", "1,x"],
    ["table1", "--neurons"],
])
def test_usage_errors_exit_1(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1
    assert "usage:" in err and out == ""


def test_bench_zero_workers_is_usage_error(capsys):
    assert run(capsys, "bench", "--workers", "0", "--dry-run")[0] == 1


def test_full_scale_preset_parse():
    args = build_parser().parse_args(["bench", "--paper-preset"])
    plan = plan_from_args(args)
    assert plan.entry_counts == (50_000_000, 100_000_000, 500_000_000)
    assert plan.worker_counts == (1, 2, 4, 6, 8, 10, 12, 14, 16, 18)


def test_config_file_bench_keys(tmp_path):
    cfg = tmp_path / "b.cfg"
    cfg.write_text("entries = 10, 20\nworkers = 3\ntrials = 2\nbackend = disk\nseed = 9\n")
    plan = plan_from_args(build_parser().parse_args(["bench", "--config", str(cfg), "--trials", "5"]))
    assert (plan.entry_counts, plan.worker_counts, plan.trials, plan.backend, plan.seed) == \
        ((10, 20), (3,), 5, "durable", 9)


def test_help_exits_zero(capsys):
    assert cli_main(["--help"]) == 0
