"""End-to-end wiring shared by the command line, tests, and demos.

One bundle object carries the dataset, the two assistants (full-view
and reduced), and the fitted subjective world model; the experiment
workflows build plans, calibrate the anchoring schedule against the
configured curves, and run the simulations.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import datagen
from .classifier import (
    LinearClassifier,
    TrainingConfig,
    rank_and_select_features,
    reduced_feature_set,
    train,
)
from .dataset import PreparedDataset, ingest, prepare
from .errors import ConfigError
from .harness import (
    build_experiment1_plan,
    build_experiment2_plan,
    build_training_trials,
    conditional_source,
    fit_subjective_model,
    probe_source,
    run_experiment1,
    run_experiment2,
)
from .response import (
    AgentConfig,
    AgreementCurve,
    BetaSchedule,
    assumption_demo_curve,
    calibrate_beta,
    default_experiment1_curve,
    experiment2_collaborative_curve,
    experiment2_explained_curve,
)

# Frozen defaults reproduced by the shipped configs.
DEFAULT_GENERATOR_SEED = datagen.DEFAULT_SEED
DEFAULT_SPLIT_SEED = 1
DEFAULT_TRAIN_SEED = 0
DEFAULT_EXPERIMENT1_PLAN_SEED = 5
DEFAULT_EXPERIMENT2_PLAN_SEED = 11

CURVES_BY_NAME = {
    "experiment1_default": default_experiment1_curve,
    "experiment2_collaborative": experiment2_collaborative_curve,
    "experiment2_explained": experiment2_explained_curve,
    "assumption_demo": assumption_demo_curve,
}


def curve_from_config(spec) -> AgreementCurve:
    """A named shipped curve, or explicit knots."""
    if isinstance(spec, str):
        try:
            return CURVES_BY_NAME[spec]()
        except KeyError:
            raise ConfigError(
                f"unknown curve {spec!r}; shipped curves: {sorted(CURVES_BY_NAME)}"
            ) from None
    return AgreementCurve(
        times=tuple(spec["times"]),
        agree_when_right=tuple(spec["agree_when_right"]),
        agree_when_wrong=tuple(spec["agree_when_wrong"]),
    )


@dataclass
class ModelBundle:
    """Everything downstream of ingest+train, ready for the experiments."""

    records: list
    selected_features: list
    reduced_features: list
    dataset10: PreparedDataset
    dataset7: PreparedDataset
    model10: LinearClassifier
    model7: LinearClassifier
    agent: AgentConfig


def resolve_data_paths(
    directory,
    generate: bool = True,
    generator_seed: int = DEFAULT_GENERATOR_SEED,
) -> list[Path]:
    """Locate the two subject files, generating stand-ins if asked."""
    directory = Path(directory)
    mat = directory / "student-mat.csv"
    por = directory / "student-por.csv"
    if not (mat.exists() and por.exists()):
        if not generate:
            raise ConfigError(
                f"dataset files not found under {directory} and generation is disabled"
            )
        datagen.write_student_files(directory, seed=generator_seed)
    return [mat, por]


def build_model_bundle(
    data_paths: Sequence,
    split_seed: int = DEFAULT_SPLIT_SEED,
    train_seed: int = DEFAULT_TRAIN_SEED,
    pass_threshold: int = 10,
    training: Optional[TrainingConfig] = None,
    temperature: float = 1.0,
    announced_accuracy: float = 0.85,
    alpha: float = 1.0,
    gamma: float = 1.0,
) -> ModelBundle:
    """Ingest, train the full/retained/reduced models, fit the agent."""
    records = ingest(list(data_paths))
    full_dataset = prepare(records, pass_threshold=pass_threshold, split_seed=split_seed)
    full_model = train(full_dataset, training, seed=train_seed)
    selected = rank_and_select_features(full_model, 10)
    reduced = reduced_feature_set(selected)

    dataset10 = prepare(records, pass_threshold=pass_threshold,
                        split_seed=split_seed, features=selected)
    model10 = train(dataset10, training, seed=train_seed)
    dataset7 = prepare(records, pass_threshold=pass_threshold,
                       split_seed=split_seed, features=reduced)
    model7 = train(dataset7, training, seed=train_seed)

    prior, likelihood, ai = fit_subjective_model(
        dataset10.train_records(), list(dataset10.y_train), selected,
        announced_accuracy=announced_accuracy,
    )
    agent = AgentConfig(
        prior=prior, likelihood=likelihood, ai=ai,
        alpha=alpha, gamma=gamma, temperature=temperature,
    )
    return ModelBundle(
        records=records,
        selected_features=selected,
        reduced_features=reduced,
        dataset10=dataset10,
        dataset7=dataset7,
        model10=model10,
        model7=model7,
        agent=agent,
    )


@dataclass
class Experiment1Result:
    plan: object
    schedule: BetaSchedule
    metrics: dict


def experiment1_workflow(
    bundle: ModelBundle,
    plan_seed: int = DEFAULT_EXPERIMENT1_PLAN_SEED,
    replications: int = 10_000,
    sim_seed: int = 99,
    curve: Optional[AgreementCurve] = None,
    knot_times: Sequence[float] = (10.0, 15.0, 20.0, 25.0),
    beta_range: tuple = (-8.0, 60.0),
) -> Experiment1Result:
    """Plan, calibrate on the probe side, and replay the population."""
    curve = curve or default_experiment1_curve()
    plan = build_experiment1_plan(
        bundle.model10, bundle.dataset10.test_records(), list(bundle.dataset10.y_test),
        bundle.selected_features, seed=plan_seed,
    )
    schedule = calibrate_beta(
        curve, bundle.agent, probe_source(plan),
        knot_times=knot_times, beta_range=beta_range,
    )
    metrics, _ = run_experiment1(plan, bundle.agent, schedule, replications, sim_seed)
    return Experiment1Result(plan=plan, schedule=schedule, metrics=metrics)


@dataclass
class Experiment2Result:
    plan: object
    schedules: dict
    metrics: dict


def experiment2_workflow(
    bundle: ModelBundle,
    plan_seed: int = DEFAULT_EXPERIMENT2_PLAN_SEED,
    replications: int = 10_000,
    sim_seed: int = 123,
    collaborative_curve: Optional[AgreementCurve] = None,
    explained_curve: Optional[AgreementCurve] = None,
    t_low: float = 25.0,
    t_high: float = 10.0,
    beta_range: tuple = (-8.0, 60.0),
) -> Experiment2Result:
    """Five-group deployment with per-variant calibrated schedules.

    Calibration targets the low-confidence AI-wrong conditional, the
    stratum the allocation policy is designed to rescue.
    """
    collaborative_curve = collaborative_curve or experiment2_collaborative_curve()
    explained_curve = explained_curve or experiment2_explained_curve()
    plan = build_experiment2_plan(
        bundle.model7, bundle.dataset7.test_records(), list(bundle.dataset7.y_test),
        bundle.selected_features, seed=plan_seed,
    )
    source = conditional_source(plan, confidence_bin="C_L", shown_correct=False)
    times_all = (t_high, (t_low + t_high) / 2.0, t_low)
    shared = calibrate_beta(
        collaborative_curve, bundle.agent, source,
        knot_times=times_all, beta_range=beta_range,
    )
    explained = calibrate_beta(
        explained_curve, bundle.agent, source,
        knot_times=(t_high, t_low), beta_range=beta_range,
    )
    schedules = {
        "constant": shared,
        "random": shared,
        "confidence": shared,
        "confidence_explained": explained,
    }
    metrics, _ = run_experiment2(
        plan, bundle.agent, schedules, replications, sim_seed,
        t_low=t_low, t_high=t_high,
    )
    return Experiment2Result(plan=plan, schedules=schedules, metrics=metrics)


def training_trials_for_service(bundle: ModelBundle, model: str, seed: int):
    """Practice-section trials for live sessions (full or reduced assistant)."""
    m = bundle.model10 if model == "model10" else bundle.model7
    ds = bundle.dataset10 if model == "model10" else bundle.dataset7
    return build_training_trials(
        m, ds.train_records(), list(ds.y_train), bundle.selected_features, seed=seed
    )
