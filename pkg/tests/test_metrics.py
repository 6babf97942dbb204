"""Metric arithmetic, record round trips, and report format fidelity."""

import json
import math

import pytest

from anchortime.errors import ParameterError
from anchortime.metrics import (
    STRATUM_ORDER,
    TrialRecord,
    aggregate_records,
    metrics_envelope,
    metrics_to_rows,
    parse_csv,
    parse_text,
    proportion,
    render,
    render_csv,
    render_text,
    stratum_key,
)


def test_proportion_arithmetic():
    measure = proportion(30, 100)
    assert measure["value"] == 0.3
    assert measure["se"] == pytest.approx(math.sqrt(0.3 * 0.7 / 100), abs=1e-15)
    assert measure["n"] == 100
    with pytest.raises(ParameterError):
        proportion(0, 0)


def sample_metrics():
    groups = {
        "constant": {
            "n_sessions": 10,
            "n_trials": 400,
            "accuracy": proportion(260, 400),
            "agreement": proportion(300, 400),
            "strata": {
                "C_L|ai_wrong": {
                    "n": 90,
                    "accuracy": proportion(33, 90),
                    "agreement": proportion(57, 90),
                },
                "C_H|ai_wrong": None,  # empty stratum stays explicit
                "C_H|ai_correct": {
                    "n": 160,
                    "accuracy": proportion(150, 160),
                    "agreement": proportion(150, 160),
                },
                "C_L|ai_correct": {
                    "n": 150,
                    "accuracy": proportion(77, 150),
                    "agreement": proportion(93, 150),
                },
            },
        },
        "human_only": {
            "n_sessions": 10,
            "n_trials": 400,
            "accuracy": proportion(250, 400),
            "agreement": None,  # undefined without a shown prediction
            "strata": {key: None for key in STRATUM_ORDER},
        },
    }
    groups["constant"]["by_time"] = {
        "10": {
            "probe_disagreement": proportion(48, 100),
            "unmodified_disagreement": proportion(10, 100),
            "accuracy": proportion(61, 100),
        }
    }
    return metrics_envelope("experiment2", seed=7, replications=10, groups=groups)


def test_json_text_json_round_trip_exact():
    metrics = sample_metrics()
    text = render_text(metrics)
    again = parse_text(text)
    assert json.dumps(again, sort_keys=True) == json.dumps(metrics, sort_keys=True)


def test_json_csv_json_round_trip_exact():
    metrics = sample_metrics()
    again = parse_csv(render_csv(metrics))
    assert json.dumps(again, sort_keys=True) == json.dumps(metrics, sort_keys=True)


def test_three_format_chain_preserves_values():
    metrics = sample_metrics()
    chained = parse_text(render_text(parse_csv(render_csv(metrics))))
    assert json.dumps(chained, sort_keys=True) == json.dumps(metrics, sort_keys=True)


def test_empty_stratum_renders_as_null():
    text = render_text(sample_metrics())
    null_lines = [l for l in text.splitlines() if "C_H|ai_wrong" in l]
    assert null_lines
    assert all("null" in l for l in null_lines)
    assert not any(" 0 " in l for l in null_lines)


def test_agreement_omitted_for_human_only():
    metrics = sample_metrics()
    rows = metrics_to_rows(metrics)
    agreement_rows = [
        r for r in rows if r[0] == "human_only" and r[1] == "overall" and r[2] == "agreement"
    ]
    assert agreement_rows == [("human_only", "overall", "agreement", None, None, None)]


def test_series_follow_marker_taxonomy_order():
    rows = metrics_to_rows(sample_metrics())
    sections = [r[1] for r in rows if r[0] == "constant" and r[1].startswith("stratum:")]
    seen = []
    for s in sections:
        key = s.split(":", 1)[1]
        if key not in seen:
            seen.append(key)
    assert seen == list(STRATUM_ORDER)
    overall_at = next(i for i, r in enumerate(rows) if r[0] == "constant" and r[1] == "overall")
    first_stratum = next(
        i for i, r in enumerate(rows) if r[0] == "constant" and r[1].startswith("stratum:")
    )
    assert overall_at < first_stratum


def test_unknown_format_rejected():
    with pytest.raises(ParameterError):
        render(sample_metrics(), "yaml")


def test_trial_record_round_trip():
    record = TrialRecord(
        session_id="s1", trial_id=4, group="confidence", allocated_seconds=25.0,
        decision=1, correct=True, agree=False, elapsed_seconds=25.8,
        self_confidence="medium", confidence_bin="C_L", shown_correct=False, probe=True,
    )
    again = TrialRecord.from_payload(json.loads(json.dumps(record.to_payload())))
    assert again == record


def test_aggregate_records_basic():
    records = []
    for i in range(20):
        records.append(TrialRecord(
            session_id=f"s{i % 2}", trial_id=i, group="constant",
            allocated_seconds=17.5, decision=i % 2, correct=i % 4 == 0,
            agree=i % 2 == 0, elapsed_seconds=18.0, self_confidence="low",
            confidence_bin="C_L" if i < 10 else "C_H", shown_correct=i % 2 == 0,
        ))
    out = aggregate_records(records)
    assert out["n_sessions"] == 2
    assert out["n_trials"] == 20
    assert out["accuracy"]["value"] == pytest.approx(5 / 20)
    key = stratum_key("C_L", False)
    assert key == "C_L|ai_wrong"
    assert out["strata"][key]["n"] == 5
