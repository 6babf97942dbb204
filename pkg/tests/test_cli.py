"""Command-line pipeline: outputs, determinism, exit codes, help text."""

import json
from pathlib import Path

import pytest

from anchortime.cli import build_parser, main
from anchortime.metrics import parse_csv
from anchortime.schema import load_json

SNAPSHOT = Path(__file__).parent / "data" / "cli_help.txt"


def write_config(path, extra, seed=5):
    config = {
        "schema_version": 1,
        "kind": "run_config",
        "seed": seed,
        "data": {"directory": None, "generate": True, "generator_seed": 20210607},
        "model": {"split_seed": 1, "train_seed": 0},
        "agent": {"temperature": 1.0, "announced_accuracy": 0.85},
    }
    config.update(extra)
    with open(path, "w") as fh:
        json.dump(config, fh)
    return path


@pytest.fixture()
def config_dir(tmp_path, data_dir):
    def make(name, extra, seed=5):
        extra = dict(extra)
        data = extra.get("data", {})
        data.setdefault("directory", str(data_dir))
        extra["data"] = {**{"generate": True, "generator_seed": 20210607}, **data}
        return write_config(tmp_path / name, extra, seed=seed)
    return make


def run_cli(*argv):
    return main(list(argv))


def test_help_snapshot():
    parser = build_parser()
    help_text = parser.format_help()
    for sub in ("ingest", "train", "calibrate", "simulate", "compare-policies", "report"):
        assert sub in help_text
    simulate_help = None
    for action in parser._subparsers._group_actions[0].choices.items():
        if action[0] == "simulate":
            simulate_help = action[1].format_help()
    for flag in ("--config", "--seed", "--out", "--format", "--replications", "--threads"):
        assert flag in simulate_help
    snapshot = help_text + "\n" + simulate_help
    if not SNAPSHOT.exists():  # first run writes the snapshot
        SNAPSHOT.parent.mkdir(parents=True, exist_ok=True)
        SNAPSHOT.write_text(snapshot)
    assert snapshot == SNAPSHOT.read_text()


def test_ingest_counts(config_dir, tmp_path, capsys):
    config = config_dir("ingest.json", {})
    assert run_cli("ingest", "--config", str(config), "--out", str(tmp_path / "out")) == 0
    summary = load_json(tmp_path / "out" / "ingest-summary.json")
    assert summary["records"] == 1044
    assert summary["by_subject"] == {"math": 395, "portuguese": 649}
    lines = (tmp_path / "out" / "records.jsonl").read_text().splitlines()
    assert len(lines) == 1044


def test_train_reduced_model_lists_seven_features(config_dir, tmp_path):
    config = config_dir("train7.json", {"model": {"split_seed": 1, "train_seed": 0,
                                                    "features": "experiment2_reduced"}})
    out = tmp_path / "out"
    assert run_cli("train", "--config", str(config), "--out", str(out)) == 0
    model = load_json(out / "model7.json")
    assert len(model["weights"]) == 7


def test_simulate_twice_is_byte_identical(config_dir, tmp_path):
    config = config_dir("sim.json", {
        "experiment": "experiment1",
        "experiment1": {"plan_seed": 5, "replications": 400},
    }, seed=99)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert run_cli("simulate", "--config", str(config), "--out", str(out_a)) == 0
    assert run_cli("simulate", "--config", str(config), "--out", str(out_b)) == 0
    for name in ("metrics.json", "report.txt", "schedule.json"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_simulate_seed_override_changes_metrics(config_dir, tmp_path):
    config = config_dir("sim2.json", {
        "experiment": "experiment1",
        "experiment1": {"plan_seed": 5, "replications": 300},
    }, seed=99)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert run_cli("simulate", "--config", str(config), "--out", str(out_a)) == 0
    assert run_cli("simulate", "--config", str(config), "--seed", "100",
                   "--out", str(out_b)) == 0
    assert (out_a / "metrics.json").read_bytes() != (out_b / "metrics.json").read_bytes()


def test_compare_policies_demo_ranks_confidence_first(tmp_path):
    config = write_config(tmp_path / "cmp.json", {
        "compare": {
            "curve": "assumption_demo",
            "ai_accuracy_low": 0.45, "ai_accuracy_high": 0.75, "p_low": 0.5,
            "budget": {"per_trial": 17.5, "trials": 40, "t_min": 10.0},
            "grid": {"start": 10.0, "stop": 25.0, "step": 2.5},
        },
    }, seed=7)
    out = tmp_path / "out"
    assert run_cli("compare-policies", "--config", str(config), "--out", str(out)) == 0
    comparison = load_json(out / "comparison.json")
    assert comparison["ranking"][0] == "confidence_based"
    assert comparison["confidence_dominates"] is True
    assert comparison["assumption1"]["holds"] is True
    text = (out / "comparison.txt").read_text()
    assert "confidence_based" in text.splitlines()[1]


def test_report_round_trip_formats(config_dir, tmp_path, capsys):
    config = config_dir("sim3.json", {
        "experiment": "experiment1",
        "experiment1": {"plan_seed": 5, "replications": 200},
    }, seed=99)
    out = tmp_path / "out"
    assert run_cli("simulate", "--config", str(config), "--out", str(out)) == 0
    capsys.readouterr()
    assert run_cli("report", "--input", str(out / "metrics.json"), "--format", "csv") == 0
    csv_text = capsys.readouterr().out
    metrics = load_json(out / "metrics.json")
    assert json.dumps(parse_csv(csv_text), sort_keys=True) == \
        json.dumps(metrics, sort_keys=True)


# ---------------------------------------------------------------------------
# Exit codes
# ---------------------------------------------------------------------------


def test_missing_config_is_config_error(tmp_path, capsys):
    assert run_cli("simulate", "--config", str(tmp_path / "missing.json")) == 2
    assert "configuration error" in capsys.readouterr().err


def test_config_without_seed_rejected(tmp_path, capsys):
    path = tmp_path / "seedless.json"
    path.write_text(json.dumps({"schema_version": 1, "kind": "run_config"}))
    assert run_cli("simulate", "--config", str(path)) == 2
    assert "seed" in capsys.readouterr().err


def test_bad_data_is_data_error(tmp_path, capsys):
    bad_dir = tmp_path / "data"
    bad_dir.mkdir()
    (bad_dir / "student-mat.csv").write_text("bogus;header\n1;2\n")
    (bad_dir / "student-por.csv").write_text("bogus;header\n1;2\n")
    config = write_config(tmp_path / "bad.json", {
        "experiment": "experiment1",
        "data": {"directory": str(bad_dir), "generate": False},
    })
    assert run_cli("simulate", "--config", str(config)) == 3
    assert "data error" in capsys.readouterr().err


def test_unreachable_curve_is_calibration_error(config_dir, tmp_path, capsys):
    config = config_dir("cal.json", {
        "experiment": "experiment1",
        "experiment1": {
            "plan_seed": 5, "replications": 10,
            "curve": {"times": [10, 25], "agree_when_right": [0.9, 0.9],
                       "agree_when_wrong": [1.0, 1.0]},
            "beta_range": [-2, 2],
        },
    }, seed=99)
    assert run_cli("simulate", "--config", str(config), "--out", str(tmp_path / "o")) == 4
    assert "calibration error" in capsys.readouterr().err


def test_infeasible_cap_is_budget_error(tmp_path, capsys):
    config = write_config(tmp_path / "cap.json", {
        "compare": {
            "curve": "assumption_demo",
            "p_low": 0.5,
            "budget": {"per_trial": 17.5, "trials": 40, "t_min": 10.0, "t_cap": 20.0},
        },
    }, seed=7)
    assert run_cli("compare-policies", "--config", str(config),
                   "--out", str(tmp_path / "o")) == 5
    assert "budget error" in capsys.readouterr().err


def test_manifest_records_inputs_and_outputs(config_dir, tmp_path):
    config = config_dir("sim4.json", {
        "experiment": "experiment1",
        "experiment1": {"plan_seed": 5, "replications": 100},
    }, seed=99)
    out = tmp_path / "out"
    assert run_cli("simulate", "--config", str(config), "--out", str(out)) == 0
    manifest = load_json(out / "manifest-simulate.json")
    assert manifest["kind"] == "run_manifest"
    assert manifest["subcommand"] == "simulate"
    assert manifest["seed"] == 99
    assert str(out / "metrics.json") in manifest["outputs"]
    assert manifest["input_hashes"]
    assert manifest["duration_seconds"] >= 0
