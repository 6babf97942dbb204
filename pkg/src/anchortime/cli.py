"""Command-line pipeline: ingest, train, calibrate, simulate, compare, report.

Config-file-first: every run takes a JSON config (seeds are mandatory
there, never drawn from entropy) with flag overrides for the common
knobs.  Each run writes its outputs plus a manifest recording input
hashes, the resolved config, seed, version, and wall-clock duration.

Exit codes: 0 success, 2 configuration, 3 data, 4 calibration,
5 budget, 1 anything else.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .allocation import (
    ConfidenceSplit,
    RewardCurves,
    TimeBudget,
    compare_policies,
    grid_search_two_level,
)
from .classifier import TrainingConfig
from .dataset import ingest
from .errors import (
    AnchortimeError,
    BudgetError,
    CalibrationError,
    ConfigError,
    DataFormatError,
    SamplingError,
)
from .metrics import render
from .response import fitted_slope
from .schema import check_envelope, dump_json, envelope, load_json
from .workflows import (
    DEFAULT_GENERATOR_SEED,
    build_model_bundle,
    curve_from_config,
    experiment1_workflow,
    experiment2_workflow,
    resolve_data_paths,
)

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_CALIBRATION = 4
EXIT_BUDGET = 5

OUT_ENV_VAR = "ANCHORTIME_OUT"


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _load_config(path) -> dict:
    config = load_json(path)
    config = check_envelope(config, "run_config")
    if "seed" not in config:
        raise ConfigError("config must pin a seed; entropy-derived runs are not reproducible")
    return config


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(OUT_ENV_VAR) or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _bundle_from_config(config, data_dir_override=None):
    data_cfg = config.get("data", {})
    directory = data_dir_override or data_cfg.get("directory", "data")
    paths = resolve_data_paths(
        directory,
        generate=data_cfg.get("generate", True),
        generator_seed=data_cfg.get("generator_seed", DEFAULT_GENERATOR_SEED),
    )
    model_cfg = config.get("model", {})
    training = TrainingConfig(
        learning_rate=model_cfg.get("learning_rate", 0.5),
        l2=model_cfg.get("l2", 1e-3),
        epochs=model_cfg.get("epochs", 5000),
        tolerance=model_cfg.get("tolerance", 1e-6),
    )
    agent_cfg = config.get("agent", {})
    bundle = build_model_bundle(
        paths,
        split_seed=model_cfg.get("split_seed", 1),
        train_seed=model_cfg.get("train_seed", 0),
        pass_threshold=model_cfg.get("pass_threshold", 10),
        training=training,
        temperature=agent_cfg.get("temperature", 1.0),
        announced_accuracy=agent_cfg.get("announced_accuracy", 0.85),
        alpha=agent_cfg.get("alpha", 1.0),
        gamma=agent_cfg.get("gamma", 1.0),
    )
    return bundle, paths


class ManifestWriter:
    def __init__(self, subcommand: str, config: dict, seed, out_dir: Path):
        self.subcommand = subcommand
        self.config = config
        self.seed = seed
        self.out_dir = out_dir
        self.inputs: dict[str, str] = {}
        self.outputs: list[str] = []
        self.started = time.monotonic()

    def add_input(self, path):
        path = Path(path)
        self.inputs[str(path)] = _sha256(path)

    def write_output(self, name: str, data) -> Path:
        path = self.out_dir / name
        if isinstance(data, str):
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(data)
        else:
            dump_json(data, path)
        self.outputs.append(str(path))
        return path

    def finalize(self) -> Path:
        manifest = envelope(
            "run_manifest",
            {
                "subcommand": self.subcommand,
                "config": self.config,
                "input_hashes": self.inputs,
                "seed": self.seed,
                "tool_version": __version__,
                "outputs": sorted(self.outputs),
                "duration_seconds": time.monotonic() - self.started,
            },
        )
        path = self.out_dir / f"manifest-{self.subcommand}.json"
        dump_json(manifest, path)
        return path


def _start(args, subcommand: str):
    config = _load_config(args.config)
    seed = args.seed if args.seed is not None else config["seed"]
    writer = ManifestWriter(subcommand, config, seed, _out_dir(args))
    writer.add_input(args.config)
    return config, seed, writer


def cmd_ingest(args) -> int:
    config, seed, writer = _start(args, "ingest")
    data_cfg = config.get("data", {})
    paths = resolve_data_paths(
        data_cfg.get("directory", "data"),
        generate=data_cfg.get("generate", True),
        generator_seed=data_cfg.get("generator_seed", DEFAULT_GENERATOR_SEED),
    )
    records = ingest(paths, subject_filter=data_cfg.get("subject_filter"))
    for p in paths:
        writer.add_input(p)
    lines = "\n".join(
        json.dumps({"subject": r.subject, **r.values}, sort_keys=True) for r in records
    )
    writer.write_output("records.jsonl", lines + "\n")
    by_subject: dict[str, int] = {}
    for r in records:
        by_subject[r.subject] = by_subject.get(r.subject, 0) + 1
    writer.write_output(
        "ingest-summary.json",
        envelope("ingest_summary", {
            "records": len(records),
            "by_subject": by_subject,
            "pass_rate_at_10": sum(r.final_grade >= 10 for r in records) / len(records),
        }),
    )
    writer.finalize()
    print(f"ingested {len(records)} records from {len(paths)} files")
    return 0


def cmd_train(args) -> int:
    config, seed, writer = _start(args, "train")
    bundle, paths = _bundle_from_config(config)
    for p in paths:
        writer.add_input(p)
    which = config.get("model", {}).get("features", "top10")
    if which == "top10":
        model = bundle.model10
    elif which == "experiment2_reduced":
        model = bundle.model7
    elif which == "full":
        # the ranking model itself: retrain on all features for output
        from .dataset import prepare
        from .classifier import train as train_model
        ds = prepare(bundle.records, split_seed=config.get("model", {}).get("split_seed", 1))
        model = train_model(ds, bundle.model10.config, seed=bundle.model10.seed)
    else:
        raise ConfigError(
            f"model.features must be top10, experiment2_reduced, or full; got {which!r}"
        )
    name = {"top10": "model10", "experiment2_reduced": "model7", "full": "model-full"}[which]
    writer.write_output(f"{name}.json", model.to_json())
    ds = bundle.dataset7 if which == "experiment2_reduced" else bundle.dataset10
    writer.write_output(
        "train-summary.json",
        envelope("train_summary", {
            "features": model.features,
            "train_accuracy": model.accuracy_standardized(ds.X_train, ds.y_train),
            "test_accuracy": model.accuracy_standardized(ds.X_test, ds.y_test),
            "converged": model.converged,
        }),
    )
    writer.finalize()
    print(f"trained {name} over {len(model.features)} features")
    return 0


def cmd_calibrate(args) -> int:
    config, seed, writer = _start(args, "calibrate")
    bundle, paths = _bundle_from_config(config)
    for p in paths:
        writer.add_input(p)
    cal = config.get("calibrate", {})
    experiment = cal.get("experiment", "experiment1")
    if experiment == "experiment1":
        cfg = config.get("experiment1", {})
        curve = curve_from_config(cal.get("curve", "experiment1_default"))
        result = experiment1_workflow(
            bundle,
            plan_seed=cfg.get("plan_seed", 5),
            replications=1,  # calibration only; simulation not needed here
            sim_seed=seed,
            curve=curve,
            knot_times=tuple(cfg.get("knot_times", (10, 15, 20, 25))),
            beta_range=tuple(cfg.get("beta_range", (-8, 60))),
        )
        schedule = result.schedule
    else:
        cfg = config.get("experiment2", {})
        curve = curve_from_config(cal.get("curve", "experiment2_collaborative"))
        result = experiment2_workflow(
            bundle,
            plan_seed=cfg.get("plan_seed", 11),
            replications=1,
            sim_seed=seed,
            collaborative_curve=curve,
            beta_range=tuple(cfg.get("beta_range", (-8, 60))),
        )
        schedule = result.schedules["constant"]
    writer.write_output("curve.json", curve.to_json())
    writer.write_output("schedule.json", schedule.to_json())
    writer.write_output(
        "calibration-diagnostics.json",
        envelope("calibration_diagnostics", {
            "experiment": experiment,
            "residual_rmse": schedule.residual,
            "knots": [
                {"time": t, "beta": b} for t, b in zip(schedule.times, schedule.betas)
            ],
            "target_slope": fitted_slope(curve),
        }),
    )
    writer.finalize()
    print(f"calibrated {len(schedule.times)} knots, residual {schedule.residual:.6f}")
    return 0


def cmd_simulate(args) -> int:
    config, seed, writer = _start(args, "simulate")
    bundle, paths = _bundle_from_config(config)
    for p in paths:
        writer.add_input(p)
    experiment = args.experiment or config.get("experiment")
    if experiment not in ("experiment1", "experiment2"):
        raise ConfigError(
            "config (or --experiment) must select experiment1 or experiment2"
        )
    log_records = int(config.get("log_records", 0))
    if experiment == "experiment1":
        cfg = config.get("experiment1", {})
        replications = args.replications or cfg.get("replications", 10_000)
        result = experiment1_workflow(
            bundle,
            plan_seed=cfg.get("plan_seed", 5),
            replications=replications,
            sim_seed=seed,
            curve=curve_from_config(cfg.get("curve", "experiment1_default")),
            knot_times=tuple(cfg.get("knot_times", (10, 15, 20, 25))),
            beta_range=tuple(cfg.get("beta_range", (-8, 60))),
        )
        metrics, schedule = result.metrics, result.schedule
        writer.write_output("schedule.json", schedule.to_json())
        if log_records:
            from .harness import run_experiment1

            _, records = run_experiment1(
                result.plan, bundle.agent, schedule, replications, seed,
                collect_records=log_records,
            )
            writer.write_output("trials.jsonl", "\n".join(
                json.dumps(r.to_payload(), sort_keys=True) for r in records
            ) + "\n")
    else:
        cfg = config.get("experiment2", {})
        replications = args.replications or cfg.get("replications", 10_000)
        result = experiment2_workflow(
            bundle,
            plan_seed=cfg.get("plan_seed", 11),
            replications=replications,
            sim_seed=seed,
            collaborative_curve=curve_from_config(
                cfg.get("collaborative_curve", "experiment2_collaborative")),
            explained_curve=curve_from_config(
                cfg.get("explained_curve", "experiment2_explained")),
            t_low=cfg.get("t_low", 25.0),
            t_high=cfg.get("t_high", 10.0),
            beta_range=tuple(cfg.get("beta_range", (-8, 60))),
        )
        metrics = result.metrics
        for name, schedule in sorted(result.schedules.items()):
            writer.write_output(f"schedule-{name}.json", schedule.to_json())
        if log_records:
            from .harness import run_experiment2

            _, records = run_experiment2(
                result.plan, bundle.agent, result.schedules, replications, seed,
                t_low=cfg.get("t_low", 25.0), t_high=cfg.get("t_high", 10.0),
                collect_records=log_records,
            )
            writer.write_output("trials.jsonl", "\n".join(
                json.dumps(r.to_payload(), sort_keys=True) for r in records
            ) + "\n")
    writer.write_output("metrics.json", render(metrics, "json"))
    fmt = args.format or "text"
    if fmt != "json":
        writer.write_output(f"report.{'txt' if fmt == 'text' else fmt}", render(metrics, fmt))
    writer.finalize()
    print(f"simulated {experiment}: {metrics['replications']} sessions per group")
    return 0


def cmd_compare_policies(args) -> int:
    config, seed, writer = _start(args, "compare-policies")
    cmp_cfg = config.get("compare")
    if not cmp_cfg:
        raise ConfigError("config lacks a 'compare' section")
    curve = curve_from_config(cmp_cfg.get("curve", "assumption_demo"))
    budget_cfg = cmp_cfg.get("budget", {})
    trials = int(budget_cfg.get("trials", 40))
    if "total_time" in budget_cfg:
        total = float(budget_cfg["total_time"])
    else:
        total = float(budget_cfg.get("per_trial", 17.5)) * trials
    budget = TimeBudget(
        total_time=total,
        trials=trials,
        t_min=float(budget_cfg.get("t_min", 10.0)),
        t_cap=budget_cfg.get("t_cap"),
    )
    grid_cfg = cmp_cfg.get("grid", {})
    start = float(grid_cfg.get("start", 10.0))
    stop = float(grid_cfg.get("stop", 25.0))
    step = float(grid_cfg.get("step", 2.5))
    grid = []
    t = start
    while t <= stop + 1e-9:
        grid.append(round(t, 6))
        t += step
    curves = RewardCurves.from_agreement(
        curve,
        float(cmp_cfg.get("ai_accuracy_low", 0.45)),
        float(cmp_cfg.get("ai_accuracy_high", 0.75)),
        grid,
    )
    split = ConfidenceSplit(float(cmp_cfg.get("p_low", 0.5)))
    comparison = compare_policies(split, curves, budget)
    best = grid_search_two_level(split, curves, budget, resolution=0.5)
    payload = comparison.to_json()
    payload["grid_search_two_level"] = {
        "t_low": best[0], "t_high": best[1], "reward": best[2],
    }
    writer.write_output("comparison.json", payload)

    lines = ["policy                 reward"]
    for name in comparison.ranking:
        lines.append(f"{name:<22} {comparison.rewards[name]!r}")
    lines.append("")
    lines.append(f"confidence_dominates   {str(comparison.confidence_dominates).lower()}")
    lines.append(f"assumption1_holds      {str(comparison.assumption.holds).lower()}")
    lines.append(f"t_low                  {comparison.t_low!r}")
    lines.append(f"t_high                 {comparison.t_high!r}")
    for violation in comparison.assumption.violations:
        lines.append("violation              " + " ".join(str(v) for v in violation))
    writer.write_output("comparison.txt", "\n".join(lines) + "\n")
    writer.finalize()
    print(f"best policy: {comparison.ranking[0]}")
    return 0


def cmd_report(args) -> int:
    metrics = load_json(args.input)
    check_envelope(metrics, "stratified_metrics")
    fmt = args.format or "text"
    rendered = render(metrics, fmt)
    if args.out:
        out = _out_dir(args)
        suffix = {"json": "json", "text": "txt", "csv": "csv"}[fmt]
        path = out / f"report.{suffix}"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(rendered)
        print(str(path))
    else:
        sys.stdout.write(rendered)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anchortime",
        description="Pipeline for anchored decision simulations and time allocation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="run config JSON (seeds mandatory)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None,
                       help=f"output directory (default: ${OUT_ENV_VAR} or ./out)")
        p.add_argument("--format", choices=("json", "text", "csv"), default=None,
                       help="report format (default: text)")
        p.add_argument("--replications", type=int, default=None,
                       help="override replication count")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads (reserved; runs are single-process)")

    p = sub.add_parser("ingest", help="parse and validate the dataset files")
    common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train the assisting classifier")
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("calibrate", help="fit the anchoring-weight schedule to a curve")
    common(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("simulate", help="run a seeded experiment replication")
    common(p)
    p.add_argument("--experiment", choices=("experiment1", "experiment2"), default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare-policies", help="rank allocation policies analytically")
    common(p)
    p.set_defaults(func=cmd_compare_policies)

    p = sub.add_parser("report", help="re-render a metrics file")
    p.add_argument("--input", required=True, help="metrics JSON produced by simulate")
    common(p, needs_config=False)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataFormatError, SamplingError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except CalibrationError as exc:
        print(f"calibration error: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except AnchortimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
