import csv
import json

import pytest

from ptfsense import io
from ptfsense.cli import main
from ptfsense.harness import ConfigError, build_config, run
from ptfsense.poly import MultilinearPoly
from ptfsense.suites import list_suites


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------- config


def test_flags_override_file_values():
    cfg = build_config("reduce", {"seed": 4, "samples": 100, "n": [6]}, {"seed": 9, "samples": None})
    assert cfg.seed == 9 and cfg.samples == 100 and cfg.n == [6]
    assert cfg.grids == {"eps": [0.1, 0.25]}


def test_empty_grid_is_rejected():
    with pytest.raises(ConfigError) as exc:
        build_config("reduce", {"grids": {"eps": []}}, {})
    assert "grids.eps: must be nonempty" in exc.value.problems


def test_every_problem_is_reported_with_its_path():
    doc = {"n": [4, "x"], "seed": -1, "family": "weird", "count": 0, "grids": {"tau": [1.5]}}
    with pytest.raises(ConfigError) as exc:
        build_config("critical-index", doc, {})
    probs = exc.value.problems
    assert any(p.startswith("n[1]:") for p in probs)
    assert any(p.startswith("seed:") for p in probs)
    assert any(p.startswith("family:") for p in probs)
    assert any(p.startswith("count:") for p in probs)
    assert any(p.startswith("grids.tau[0]:") for p in probs)


def test_from_file_needs_a_path():
    with pytest.raises(ConfigError, match="path"):
        build_config("analyze", {"family": "from-file"}, {})


# ---------------------------------------------------------------- runs


def test_verify_bounds_has_no_violations(tmp_path):
    cfg = build_config("verify-bounds", {"n": [8, 10, 12, 14], "d": [2], "count": 5, "out": str(tmp_path)}, {})
    res = run(cfg)
    assert res.complete
    rows = read_csv(res.csv_path)
    assert len(rows) == 20
    assert all(r["violation"] == "False" for r in rows)
    assert all(float(r["value"]) <= float(r["reference"]) for r in rows)


def test_reduce_dictator_column_is_one_over_m(tmp_path):
    cfg = build_config("reduce", {"family": "dictator", "n": [10], "d": [1], "samples": 2000,
                                  "out": str(tmp_path)}, {})
    rows = read_csv(run(cfg).csv_path)
    assert rows
    for r in rows:
        assert float(r["value"]) == 1.0 / int(r["m"])


def test_run_writes_sidecar(tmp_path):
    cfg = build_config("analyze", {"n": [5], "count": 2, "out": str(tmp_path)}, {})
    res = run(cfg)
    meta = json.loads(res.json_path.read_text())
    assert meta["experiment"] == "analyze" and meta["complete"] and meta["rows"] == len(res.rows)
    assert meta["config"]["seed"] == 0


def test_over_budget_points_mark_run_incomplete(tmp_path):
    cfg = build_config("analyze", {"n": [5, 30], "d": [1], "count": 1, "out": str(tmp_path)}, {})
    res = run(cfg)
    assert not res.complete
    assert [s["n"] for s in res.skipped] == [30]


def test_from_file_family(tmp_path):
    io.save_poly(MultilinearPoly.from_terms(4, {(1, 2): 1.0, (3,): 0.5}), tmp_path / "p.json")
    cfg = build_config("analyze", {"family": "from-file", "path": str(tmp_path / "p.json"),
                                   "out": str(tmp_path)}, {})
    rows = run(cfg).rows
    assert {r["operation"] for r in rows} >= {"exact_as"}


@pytest.mark.parametrize("experiment,doc", [
    ("analyze", {"n": [6], "count": 2}),
    ("gaussian", {"n": [3], "count": 1, "samples": 20_000}),
    ("critical-index", {"n": [10], "count": 2, "samples": 256}),
    ("reduce", {"n": [8], "count": 2, "samples": 4096}),
    ("learn", {"n": [5], "count": 1, "train": 300, "test": 200}),
])
def test_runs_reproduce_bit_exactly_across_threads(tmp_path, experiment, doc):
    outs = []
    for threads in (1, 4):
        out = tmp_path / f"t{threads}"
        run(build_config(experiment, {**doc, "threads": threads, "out": str(out)}, {}))
        outs.append((out / f"{experiment}.csv").read_bytes())
    assert outs[0] == outs[1]


# ---------------------------------------------------------------- command line


def test_suite_catalog():
    ids = [sid for sid, _ in list_suites()]
    for required in ("lemma-key-exact", "sheppard-gns", "reduction-identity"):
        assert required in ids
    assert len(ids) == 13


def test_cli_suite_list(capsys):
    assert main(["suite", "list"]) == 0
    assert "reduction-identity" in capsys.readouterr().out


def test_cli_runs_a_passing_suite(tmp_path, capsys):
    assert main(["suite", "hermite-orthonormality", "--out", str(tmp_path)]) == 0
    assert capsys.readouterr().out.startswith("PASS")
    assert (tmp_path / "suite-hermite-orthonormality.csv").exists()
    assert json.loads((tmp_path / "suite-hermite-orthonormality.json").read_text())["passed"]


def test_cli_unknown_suite_is_a_usage_error(capsys):
    assert main(["suite", "nope"]) == 1
    assert "unknown suite" in capsys.readouterr().err


def test_cli_bad_config_exits_one(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"grids": {"eps": []}}))
    assert main(["reduce", "--config", str(cfg)]) == 1
    assert "grids.eps: must be nonempty" in capsys.readouterr().err


def test_cli_yaml_config(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("n: [6]\nd: [2]\ncount: 1\n")
    assert main(["analyze", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "analyze.csv").exists()


def test_cli_usage_errors_exit_one():
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["analyze", "--seed", "-3"])
    assert exc.value.code == 1
