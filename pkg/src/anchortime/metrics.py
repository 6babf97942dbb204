"""Trial records, stratified metrics, and report rendering.

Metrics are plain nested dicts under a fixed schema so the JSON file is
the canonical artifact; the text and CSV renderings are lossless
projections of the same rows (floats printed with ``repr`` so a parse
restores them bit-exactly).  Empty strata are explicit nulls.
"""

from __future__ import annotations

import csv as csv_module
import io
import math
from dataclasses import dataclass, asdict
from typing import Iterable, Optional, Sequence

from .errors import ParameterError
from .schema import SCHEMA_VERSION, envelope

# Figure-style series order: overall first, then the four strata in the
# marker taxonomy order.
STRATUM_ORDER = ("C_L|ai_wrong", "C_H|ai_wrong", "C_H|ai_correct", "C_L|ai_correct")

GROUPS = ("human_only", "constant", "random", "confidence", "confidence_explained")
COLLABORATIVE_GROUPS = ("constant", "random", "confidence", "confidence_explained")


@dataclass(frozen=True)
class TrialRecord:
    """One decision event, the unit of the append-only session log."""

    session_id: str
    trial_id: int
    group: str
    allocated_seconds: float
    decision: int
    correct: bool
    agree: Optional[bool]
    elapsed_seconds: float
    self_confidence: str
    confidence_bin: str
    shown_correct: Optional[bool]
    probe: bool = False

    def to_payload(self) -> dict:
        return asdict(self)

    @classmethod
    def from_payload(cls, payload) -> "TrialRecord":
        return cls(
            session_id=payload["session_id"],
            trial_id=int(payload["trial_id"]),
            group=payload["group"],
            allocated_seconds=float(payload["allocated_seconds"]),
            decision=int(payload["decision"]),
            correct=bool(payload["correct"]),
            agree=payload.get("agree"),
            elapsed_seconds=float(payload["elapsed_seconds"]),
            self_confidence=payload.get("self_confidence", "none"),
            confidence_bin=payload["confidence_bin"],
            shown_correct=payload.get("shown_correct"),
            probe=bool(payload.get("probe", False)),
        )


def proportion(successes: float, n: int) -> dict:
    """Mean of 0/1 outcomes with its binomial standard error."""
    if n <= 0:
        raise ParameterError("proportion needs n > 0")
    p = successes / n
    return {
        "value": p,
        "se": math.sqrt(max(p * (1.0 - p), 0.0) / n),
        "n": n,
    }


def stratum_key(confidence_bin: str, shown_correct: bool) -> str:
    return f"{confidence_bin}|{'ai_correct' if shown_correct else 'ai_wrong'}"


def aggregate_records(records: Sequence[TrialRecord]) -> dict:
    """Group metrics recomputed from raw records.

    Exactly the quantities the streaming simulation accumulates; the
    equality of the two paths is a tested invariant, and the session
    service reuses this function for its summaries.
    """
    if not records:
        raise ParameterError("no records to aggregate")
    group = records[0].group
    sessions = {r.session_id for r in records}
    n = len(records)
    acc = sum(r.correct for r in records)
    has_agreement = any(r.agree is not None for r in records)
    out = {
        "n_sessions": len(sessions),
        "n_trials": n,
        "accuracy": proportion(acc, n),
        "agreement": (
            proportion(sum(bool(r.agree) for r in records if r.agree is not None),
                       sum(1 for r in records if r.agree is not None))
            if has_agreement
            else None
        ),
        "strata": {},
    }
    for key in STRATUM_ORDER:
        members = [
            r for r in records
            if r.shown_correct is not None and stratum_key(r.confidence_bin, r.shown_correct) == key
        ]
        if not members:
            out["strata"][key] = None
            continue
        entry = {
            "n": len(members),
            "accuracy": proportion(sum(r.correct for r in members), len(members)),
            "agreement": (
                proportion(sum(bool(r.agree) for r in members), len(members))
                if has_agreement
                else None
            ),
        }
        out["strata"][key] = entry
    return out


def metrics_envelope(experiment: str, seed: int, replications: int, groups: dict) -> dict:
    return envelope(
        "stratified_metrics",
        {
            "experiment": experiment,
            "seed": seed,
            "replications": replications,
            "groups": groups,
        },
    )


# ---------------------------------------------------------------------------
# Report rendering: one flat row table, three encodings
# ---------------------------------------------------------------------------

_COLUMNS = ("group", "section", "metric", "value", "se", "n")


def _format_number(x) -> str:
    if x is None:
        return "null"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def _parse_number(text: str):
    if text == "null":
        return None
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return int(text)
    except ValueError:
        return float(text)


def _measure_rows(group: str, section: str, metric: str, measure) -> list[tuple]:
    if measure is None:
        return [(group, section, metric, None, None, None)]
    return [(group, section, metric, measure["value"], measure["se"], measure["n"])]


def metrics_to_rows(metrics: dict) -> list[tuple]:
    """Flatten the metrics dict to (group, section, metric, value, se, n)."""
    rows: list[tuple] = [
        ("_run", "meta", "schema_version", metrics["schema_version"], None, None),
        ("_run", "meta", "experiment", metrics["experiment"], None, None),
        ("_run", "meta", "seed", metrics["seed"], None, None),
        ("_run", "meta", "replications", metrics["replications"], None, None),
    ]
    for group in sorted(metrics["groups"]):
        gm = metrics["groups"][group]
        rows.append((group, "meta", "n_sessions", gm["n_sessions"], None, None))
        rows.append((group, "meta", "n_trials", gm["n_trials"], None, None))
        rows.extend(_measure_rows(group, "overall", "accuracy", gm["accuracy"]))
        rows.extend(_measure_rows(group, "overall", "agreement", gm["agreement"]))
        for key in STRATUM_ORDER:
            stratum = gm["strata"].get(key)
            if stratum is None:
                rows.append((group, f"stratum:{key}", "accuracy", None, None, None))
                rows.append((group, f"stratum:{key}", "agreement", None, None, None))
                continue
            rows.extend(_measure_rows(group, f"stratum:{key}", "accuracy", stratum["accuracy"]))
            rows.extend(_measure_rows(group, f"stratum:{key}", "agreement", stratum["agreement"]))
        for t in sorted(gm.get("by_time", {}) or {}, key=float):
            tm = gm["by_time"][t]
            for metric in ("probe_disagreement", "unmodified_disagreement", "accuracy"):
                rows.extend(_measure_rows(group, f"time:{t}", metric, tm.get(metric)))
    return rows


def rows_to_metrics(rows: Iterable[Sequence]) -> dict:
    """Rebuild the nested metrics dict from flattened rows."""
    meta: dict = {}
    groups: dict = {}
    for group, section, metric, value, se, n in rows:
        if group == "_run":
            meta[metric] = value
            continue
        gm = groups.setdefault(
            group,
            {"n_sessions": 0, "n_trials": 0, "accuracy": None, "agreement": None, "strata": {}},
        )
        measure = None if value is None else {"value": value, "se": se, "n": n}
        if section == "meta":
            gm[metric] = value
        elif section == "overall":
            gm[metric] = measure
        elif section.startswith("stratum:"):
            key = section.split(":", 1)[1]
            stratum = gm["strata"].get(key)
            if measure is None:
                if key not in gm["strata"]:
                    gm["strata"][key] = None
            else:
                if stratum is None:
                    stratum = gm["strata"][key] = {"n": measure["n"]}
                stratum[metric] = measure
        elif section.startswith("time:"):
            t = section.split(":", 1)[1]
            tm = gm.setdefault("by_time", {}).setdefault(t, {})
            tm[metric] = measure
        else:
            raise ParameterError(f"unknown report section {section!r}")
    return metrics_envelope(
        meta.get("experiment", ""), meta.get("seed"), meta.get("replications"), groups
    )


def render_text(metrics: dict) -> str:
    rows = metrics_to_rows(metrics)
    widths = [
        max(len(str(col)), *(len(_cell(row[i])) for row in rows))
        for i, col in enumerate(_COLUMNS)
    ]
    lines = ["  ".join(col.ljust(widths[i]) for i, col in enumerate(_COLUMNS))]
    for row in rows:
        lines.append("  ".join(_cell(row[i]).ljust(widths[i]) for i in range(len(_COLUMNS))))
    return "\n".join(lines) + "\n"


def _cell(x) -> str:
    if isinstance(x, str):
        return x
    return _format_number(x)


def parse_text(text: str) -> dict:
    lines = [line for line in text.splitlines() if line.strip()]
    rows = []
    for line in lines[1:]:
        parts = line.split()
        group, section, metric = parts[0], parts[1], parts[2]
        value = parts[3] if metric == "experiment" else _parse_number(parts[3])
        rows.append((group, section, metric, value, _parse_number(parts[4]), _parse_number(parts[5])))
    return rows_to_metrics(rows)


def render_csv(metrics: dict) -> str:
    buffer = io.StringIO()
    writer = csv_module.writer(buffer, lineterminator="\n")
    writer.writerow(_COLUMNS)
    for row in metrics_to_rows(metrics):
        writer.writerow([_cell(x) for x in row])
    return buffer.getvalue()


def parse_csv(text: str) -> dict:
    reader = csv_module.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != _COLUMNS:
        raise ParameterError(f"unexpected CSV header {header}")
    rows = []
    for parts in reader:
        group, section, metric = parts[0], parts[1], parts[2]
        if metric == "experiment":
            value = parts[3]
        else:
            value = _parse_number(parts[3])
        rows.append((group, section, metric, value, _parse_number(parts[4]), _parse_number(parts[5])))
    return rows_to_metrics(rows)


def render(metrics: dict, fmt: str) -> str:
    from .schema import dumps_json

    if fmt == "json":
        return dumps_json(metrics)
    if fmt == "text":
        return render_text(metrics)
    if fmt == "csv":
        return render_csv(metrics)
    raise ParameterError(f"unknown report format {fmt!r} (expected json, text, or csv)")
