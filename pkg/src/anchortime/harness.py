"""Seeded replications of the two timed experiments.

Builds trial plans from a trained assistant and a test pool, fits the
decision-maker's subjective world model from the training split, and
replays populations of biased-Bayes agents through the plans with the
calibrated anchoring-weight schedule.  Everything is deterministic
given the seed; replications vectorize across agents.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .biasbayes import (
    AiOutputTable,
    EmpiricalSource,
    FeatureLikelihoodTable,
    LabelPrior,
    Observation,
)
from .classifier import LinearClassifier, advise
from .dataset import RawStudentRecord
from .errors import ConfigError, ParameterError, SamplingError
from .metrics import (
    COLLABORATIVE_GROUPS,
    GROUPS,
    STRATUM_ORDER,
    TrialRecord,
    aggregate_records,
    metrics_envelope,
    proportion,
    stratum_key,
)
from .response import AgentConfig, BetaSchedule
from .schema import check_envelope, envelope

EXPERIMENT1_BLOCK_TIMES = (10.0, 15.0, 20.0, 25.0)
EXPERIMENT1_TRIALS = 36
EXPERIMENT1_PROBES = 8
EXPERIMENT2_TRIALS = 40
EXPERIMENT2_BLOCKS = 8
PROBE_STRATUM = (0.6, 0.8)

ANNOUNCED_AI_ACCURACY = 0.85

# Confidence strata used to spread trial difficulty, as in the training
# and testing sections: first interval closed, the rest half-open.
CONFIDENCE_STRATA = ((0.5, 0.6), (0.6, 0.7), (0.7, 0.8), (0.8, 0.9), (0.9, 1.0))

ABSENCE_BIN_EDGES = (0, 2, 5, 10)


def discretize_value(feature: str, value) -> str:
    """Render a raw feature value as the discrete token agents reason over."""
    if feature == "absences":
        v = int(value)
        if v == 0:
            return "0"
        lo = 1
        for edge in ABSENCE_BIN_EDGES[1:]:
            if v <= edge:
                return f"{lo}-{edge}"
            lo = edge + 1
        return f"{ABSENCE_BIN_EDGES[-1] + 1}+"
    return str(value)


def discretize_record(record: Mapping, features: Sequence[str]) -> dict:
    return {f: discretize_value(f, record[f]) for f in features}


def fit_subjective_model(
    train_records: Sequence[RawStudentRecord],
    train_labels: Sequence[int],
    features: Sequence[str],
    announced_accuracy: float = ANNOUNCED_AI_ACCURACY,
    smoothing_pseudocount: float = 1.0,
) -> tuple:
    """Prior, likelihood tables, and AI-output belief after training.

    The likelihood tables stand in for what the training section
    teaches; the AI-output table encodes the accuracy the participant
    was told, not the model's true error rate.
    """
    rows = [discretize_record(r.values, features) for r in train_records]
    likelihood = FeatureLikelihoodTable.fit(
        rows, list(train_labels), features=list(features),
        smoothing_pseudocount=smoothing_pseudocount,
    )
    rate = float(np.mean(train_labels))
    prior = LabelPrior(min(max(rate, 1e-6), 1.0 - 1e-6))
    ai = AiOutputTable.from_accuracy(announced_accuracy)
    return prior, likelihood, ai


@dataclass(frozen=True)
class TrialSpec:
    """One planned trial: what the agent sees plus scoring metadata."""

    trial_id: int
    observation: Observation
    display_features: dict
    true_label: int
    shown_prediction: int
    model_p_class1: float
    confidence: float
    confidence_bin: str
    probe: bool
    stratum: str

    def __post_init__(self):
        if self.probe:
            lo, hi = PROBE_STRATUM
            if not (lo < self.confidence <= hi):
                raise ParameterError(
                    f"probe trial {self.trial_id} outside the medium-difficulty "
                    f"stratum ({lo}, {hi}]"
                )
            model_label = int(self.model_p_class1 >= 0.5)
            if self.shown_prediction != 1 - model_label:
                raise ParameterError("probe trials must show the flipped prediction")

    @property
    def shown_correct(self) -> bool:
        return self.shown_prediction == self.true_label

    def to_payload(self) -> dict:
        return {
            "trial_id": self.trial_id,
            "features": dict(self.observation.features),
            "display_features": dict(self.display_features),
            "true_label": self.true_label,
            "shown_prediction": self.shown_prediction,
            "model_p_class1": self.model_p_class1,
            "confidence": self.confidence,
            "confidence_bin": self.confidence_bin,
            "probe": self.probe,
            "stratum": self.stratum,
        }

    @classmethod
    def from_payload(cls, payload) -> "TrialSpec":
        return cls(
            trial_id=int(payload["trial_id"]),
            observation=Observation(dict(payload["features"]), int(payload["shown_prediction"])),
            display_features=dict(payload.get("display_features", {})),
            true_label=int(payload["true_label"]),
            shown_prediction=int(payload["shown_prediction"]),
            model_p_class1=float(payload["model_p_class1"]),
            confidence=float(payload["confidence"]),
            confidence_bin=payload["confidence_bin"],
            probe=bool(payload["probe"]),
            stratum=payload["stratum"],
        )


def _stratum_label(confidence: float) -> str:
    for lo, hi in CONFIDENCE_STRATA:
        if (confidence <= hi and confidence > lo) or (lo == 0.5 and confidence <= 0.6):
            return f"({lo},{hi}]"
    return "(0.9,1.0]"


def _spread_counts(total: int, bins: int) -> list[int]:
    base, extra = divmod(total, bins)
    return [base + (1 if i < extra else 0) for i in range(bins)]


def _make_spec(
    trial_id: int,
    record: RawStudentRecord,
    label: int,
    model: LinearClassifier,
    human_features: Sequence[str],
    flip: bool,
    threshold: float,
) -> TrialSpec:
    aid = advise(model, record.values, confidence_threshold=threshold, flip=flip)
    features = discretize_record(record.values, human_features)
    display = {f: record.values[f] for f in human_features}
    return TrialSpec(
        trial_id=trial_id,
        observation=Observation(features, aid.prediction),
        display_features=display,
        true_label=int(label),
        shown_prediction=aid.prediction,
        model_p_class1=aid.p_class1,
        confidence=aid.confidence,
        confidence_bin=aid.bin,
        probe=flip,
        stratum=_stratum_label(aid.confidence),
    )


@dataclass(frozen=True)
class ExperimentPlan:
    """Ordered trials plus the block layout shared by all participants."""

    experiment: str
    trials: tuple
    block_ids: tuple  # tuple of tuples of trial indices (positions in `trials`)
    seed: int

    @property
    def n_trials(self) -> int:
        return len(self.trials)

    def probe_observations(self) -> list[Observation]:
        return [t.observation for t in self.trials if t.probe]

    def conditional_observations(self, confidence_bin=None, shown_correct=None) -> list[Observation]:
        out = []
        for t in self.trials:
            if confidence_bin is not None and t.confidence_bin != confidence_bin:
                continue
            if shown_correct is not None and t.shown_correct != shown_correct:
                continue
            out.append(t.observation)
        return out

    def to_json(self) -> dict:
        return envelope(
            "experiment_plan",
            {
                "experiment": self.experiment,
                "seed": self.seed,
                "trials": [t.to_payload() for t in self.trials],
                "block_ids": [list(b) for b in self.block_ids],
            },
        )

    @classmethod
    def from_json(cls, data) -> "ExperimentPlan":
        data = check_envelope(data, "experiment_plan")
        return cls(
            experiment=data["experiment"],
            trials=tuple(TrialSpec.from_payload(t) for t in data["trials"]),
            block_ids=tuple(tuple(b) for b in data["block_ids"]),
            seed=int(data["seed"]),
        )


def build_experiment1_plan(
    model: LinearClassifier,
    pool_records: Sequence[RawStudentRecord],
    pool_labels: Sequence[int],
    human_features: Sequence[str],
    seed: int,
    confidence_threshold: float = 0.75,
) -> ExperimentPlan:
    """36 testing trials: 8 flipped probes plus 28 stratified unmodified.

    Probes come from medium-difficulty trials the model got right;
    unmodified trials spread as evenly as possible over the five
    confidence intervals.  Trial order is fixed across participants
    (only the per-block times vary per session).
    """
    rng = np.random.default_rng(seed)
    p1 = model.predict_proba([r.values for r in pool_records])
    labels = np.asarray(pool_labels)
    predictions = (p1 >= 0.5).astype(int)
    confidence = np.maximum(p1, 1.0 - p1)
    correct = predictions == labels

    lo, hi = PROBE_STRATUM
    probe_pool = np.flatnonzero((confidence > lo) & (confidence <= hi) & correct)
    if len(probe_pool) < EXPERIMENT1_PROBES:
        raise SamplingError(
            f"interval ({lo}, {hi}]: only {len(probe_pool)} model-correct trials "
            f"available for {EXPERIMENT1_PROBES} probes"
        )
    probe_idx = rng.choice(probe_pool, size=EXPERIMENT1_PROBES, replace=False)

    remaining = np.setdiff1d(np.arange(len(pool_records)), probe_idx)
    counts = _spread_counts(EXPERIMENT1_TRIALS - EXPERIMENT1_PROBES, len(CONFIDENCE_STRATA))
    unmodified_idx: list[int] = []
    for (interval, count) in zip(CONFIDENCE_STRATA, counts):
        lo_i, hi_i = interval
        members = [
            i for i in remaining
            if (confidence[i] > lo_i or lo_i == 0.5) and confidence[i] <= hi_i + 1e-12
        ]
        if len(members) < count:
            raise SamplingError(
                f"interval ({lo_i},{hi_i}]: only {len(members)} trials available, "
                f"{count} required"
            )
        unmodified_idx.extend(rng.choice(members, size=count, replace=False))

    # interleave into 4 blocks of 9 = 2 probes + 7 unmodified, shuffled
    probes = list(probe_idx)
    unmods = list(unmodified_idx)
    rng.shuffle(probes)
    rng.shuffle(unmods)
    trials: list[TrialSpec] = []
    block_ids: list[tuple] = []
    for b in range(4):
        block_members: list[TrialSpec] = []
        for i in probes[2 * b: 2 * b + 2]:
            block_members.append(
                _make_spec(len(trials) + len(block_members), pool_records[i], labels[i],
                           model, human_features, True, confidence_threshold)
            )
        for i in unmods[7 * b: 7 * b + 7]:
            block_members.append(
                _make_spec(len(trials) + len(block_members), pool_records[i], labels[i],
                           model, human_features, False, confidence_threshold)
            )
        order = rng.permutation(len(block_members))
        block_members = [block_members[k] for k in order]
        start = len(trials)
        block_ids.append(tuple(range(start, start + len(block_members))))
        trials.extend(block_members)

    # re-id by final position so trial ids follow presentation order
    trials = [
        TrialSpec(
            trial_id=i,
            observation=t.observation,
            display_features=t.display_features,
            true_label=t.true_label,
            shown_prediction=t.shown_prediction,
            model_p_class1=t.model_p_class1,
            confidence=t.confidence,
            confidence_bin=t.confidence_bin,
            probe=t.probe,
            stratum=t.stratum,
        )
        for i, t in enumerate(trials)
    ]
    return ExperimentPlan(
        experiment="experiment1", trials=tuple(trials), block_ids=tuple(block_ids), seed=seed
    )


def build_experiment2_plan(
    model: LinearClassifier,
    pool_records: Sequence[RawStudentRecord],
    pool_labels: Sequence[int],
    human_features: Sequence[str],
    seed: int,
    confidence_threshold: float = 0.75,
) -> ExperimentPlan:
    """40 trials: 20 per confidence bin, spread across each bin's range.

    Each bin's candidates are sorted by confidence and partitioned into
    20 runs; one seeded pick per run keeps the predicted probabilities
    spread while remaining reproducible.
    """
    rng = np.random.default_rng(seed)
    p1 = model.predict_proba([r.values for r in pool_records])
    labels = np.asarray(pool_labels)
    confidence = np.maximum(p1, 1.0 - p1)
    half = EXPERIMENT2_TRIALS // 2

    chosen: list[int] = []
    for bin_name, mask in (
        ("C_L", confidence < confidence_threshold),
        ("C_H", confidence >= confidence_threshold),
    ):
        members = np.flatnonzero(mask)
        if len(members) < half:
            raise SamplingError(
                f"bin {bin_name}: only {len(members)} pool trials available, {half} required"
            )
        ordered = members[np.argsort(confidence[members], kind="stable")]
        splits = np.array_split(ordered, half)
        chosen.extend(int(part[rng.integers(0, len(part))]) for part in splits)

    trials = [
        _make_spec(i, pool_records[idx], labels[idx], model, human_features,
                   False, confidence_threshold)
        for i, idx in enumerate(chosen)
    ]
    # fixed block layout: filled per group at session time
    block_ids = tuple(
        tuple(range(b * 5, (b + 1) * 5)) for b in range(EXPERIMENT2_BLOCKS)
    )
    return ExperimentPlan(
        experiment="experiment2", trials=tuple(trials), block_ids=tuple(block_ids), seed=seed
    )


def build_training_trials(
    model: LinearClassifier,
    train_records: Sequence[RawStudentRecord],
    train_labels: Sequence[int],
    human_features: Sequence[str],
    seed: int,
    per_stratum: int = 3,
    confidence_threshold: float = 0.75,
) -> tuple:
    """15 practice trials spread uniformly over the confidence intervals."""
    rng = np.random.default_rng(seed)
    p1 = model.predict_proba([r.values for r in train_records])
    confidence = np.maximum(p1, 1.0 - p1)
    labels = np.asarray(train_labels)
    chosen: list[int] = []
    for i, (lo, hi) in enumerate(CONFIDENCE_STRATA):
        members = [
            j for j in range(len(train_records))
            if (confidence[j] > lo or lo == 0.5) and confidence[j] <= hi + 1e-12
        ]
        if len(members) < per_stratum:
            raise SamplingError(
                f"interval ({lo},{hi}]: only {len(members)} training trials available"
            )
        chosen.extend(rng.choice(members, size=per_stratum, replace=False))
    rng.shuffle(chosen)
    return tuple(
        _make_spec(i, train_records[idx], labels[idx], model, human_features,
                   False, confidence_threshold)
        for i, idx in enumerate(chosen)
    )


# ---------------------------------------------------------------------------
# Session plans (per participant)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SessionPlan:
    """Concrete per-participant schedule: block times over the fixed trials."""

    group: str
    trial_order: tuple  # positions into plan.trials, presentation order
    allocated_seconds: tuple  # same length/order as trial_order
    permutation_seed: int

    def blocks(self, block_size: int) -> list[tuple]:
        return [
            tuple(self.trial_order[i: i + block_size])
            for i in range(0, len(self.trial_order), block_size)
        ]


def experiment1_session_plan(plan: ExperimentPlan, permutation_seed: int) -> SessionPlan:
    """Fixed trial order; the four block times are a seeded permutation."""
    rng = np.random.default_rng(permutation_seed)
    times = rng.permutation(np.array(EXPERIMENT1_BLOCK_TIMES))
    allocated = np.empty(plan.n_trials)
    for b, members in enumerate(plan.block_ids):
        for i in members:
            allocated[i] = times[b]
    return SessionPlan(
        group="experiment1",
        trial_order=tuple(range(plan.n_trials)),
        allocated_seconds=tuple(allocated),
        permutation_seed=permutation_seed,
    )


def experiment2_session_plan(
    plan: ExperimentPlan,
    group: str,
    permutation_seed: int,
    t_low: float = 25.0,
    t_high: float = 10.0,
) -> SessionPlan:
    """Group-specific times in blocks of five, order seeded per participant."""
    if group not in GROUPS:
        raise ParameterError(f"unknown group {group!r}; expected one of {GROUPS}")
    rng = np.random.default_rng(permutation_seed)
    n = plan.n_trials
    if group in ("human_only", "constant"):
        order = tuple(int(i) for i in rng.permutation(n))
        seconds = 25.0 if group == "human_only" else (t_low + t_high) / 2.0
        return SessionPlan(group, order, tuple([seconds] * n), permutation_seed)
    if group == "random":
        order = tuple(int(i) for i in rng.permutation(n))
        block_times = np.array([t_high] * (EXPERIMENT2_BLOCKS // 2) + [t_low] * (EXPERIMENT2_BLOCKS // 2))
        block_times = block_times[rng.permutation(EXPERIMENT2_BLOCKS)]
        allocated = tuple(float(block_times[i // 5]) for i in range(n))
        return SessionPlan(group, order, allocated, permutation_seed)
    # confidence-based variants: low-confidence trials in long blocks
    low_positions = [i for i, t in enumerate(plan.trials) if t.confidence_bin == "C_L"]
    high_positions = [i for i, t in enumerate(plan.trials) if t.confidence_bin == "C_H"]
    rng.shuffle(low_positions)
    rng.shuffle(high_positions)
    low_blocks = [tuple(low_positions[i: i + 5]) for i in range(0, len(low_positions), 5)]
    high_blocks = [tuple(high_positions[i: i + 5]) for i in range(0, len(high_positions), 5)]
    labelled = [(b, t_low) for b in low_blocks] + [(b, t_high) for b in high_blocks]
    order_idx = rng.permutation(len(labelled))
    trial_order: list[int] = []
    allocated: list[float] = []
    for k in order_idx:
        members, seconds = labelled[k]
        trial_order.extend(members)
        allocated.extend([seconds] * len(members))
    return SessionPlan(group, tuple(trial_order), tuple(allocated), permutation_seed)


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -500, 500)))


def _evidence_arrays(plan: ExperimentPlan, agent: AgentConfig) -> tuple:
    data_terms = np.array([
        sum(agent.likelihood.log_ratio(f, v) for f, v in t.observation.features.items())
        for t in plan.trials
    ])
    ai_terms = np.array([agent.ai.log_ratio(t.shown_prediction) for t in plan.trials])
    return data_terms, ai_terms, agent.prior.log_odds


def _decide_matrix(log_ratio: np.ndarray, temperature: float, rng, shown: np.ndarray) -> np.ndarray:
    """Agent labels for a replications x trials log-ratio matrix."""
    if temperature > 0:
        p1 = _sigmoid(log_ratio / temperature)
        return rng.random(log_ratio.shape) < p1
    labels = log_ratio > 0
    ties = np.abs(log_ratio) <= 1e-12
    if np.any(ties):
        labels = np.where(ties, shown.astype(bool), labels)  # favor the shown prediction
    return labels


def _stratum_metrics(plan: ExperimentPlan, correct: np.ndarray, agree) -> dict:
    strata: dict = {}
    bins = np.array([t.confidence_bin for t in plan.trials])
    shown_correct = np.array([t.shown_correct for t in plan.trials])
    for key in STRATUM_ORDER:
        bin_name, side = key.split("|")
        mask = (bins == bin_name) & (shown_correct == (side == "ai_correct"))
        count = int(mask.sum()) * correct.shape[0]
        if count == 0:
            strata[key] = None
            continue
        entry = {
            "n": count,
            "accuracy": proportion(float(correct[:, mask].sum()), count),
            "agreement": (
                proportion(float(agree[:, mask].sum()), count) if agree is not None else None
            ),
        }
        strata[key] = entry
    return strata


def _group_metrics(plan: ExperimentPlan, correct: np.ndarray, agree) -> dict:
    n_total = correct.size
    return {
        "n_sessions": int(correct.shape[0]),
        "n_trials": n_total,
        "accuracy": proportion(float(correct.sum()), n_total),
        "agreement": (
            proportion(float(agree.sum()), agree.size) if agree is not None else None
        ),
        "strata": _stratum_metrics(plan, correct, agree),
    }


def _self_confidence(log_ratio_row: np.ndarray) -> list[str]:
    """Tercile labels of |log ratio| within one session."""
    magnitude = np.abs(log_ratio_row)
    order = np.argsort(np.argsort(magnitude, kind="stable"), kind="stable")
    n = len(magnitude)
    labels = []
    for rank in order:
        if rank < n / 3:
            labels.append("low")
        elif rank < 2 * n / 3:
            labels.append("medium")
        else:
            labels.append("high")
    return labels


def _collect_records(
    plan, group, times, labels, correct, agree, log_ratio, limit
) -> list[TrialRecord]:
    records = []
    shown_correct = [t.shown_correct for t in plan.trials]
    for r in range(min(limit, times.shape[0])):
        confidences = _self_confidence(log_ratio[r])
        for i, trial in enumerate(plan.trials):
            records.append(TrialRecord(
                session_id=f"sim-{group}-{r}",
                trial_id=trial.trial_id,
                group=group,
                allocated_seconds=float(times[r, i]),
                decision=int(labels[r, i]),
                correct=bool(correct[r, i]),
                agree=None if agree is None else bool(agree[r, i]),
                elapsed_seconds=float(times[r, i]),
                self_confidence=confidences[i],
                confidence_bin=trial.confidence_bin,
                shown_correct=shown_correct[i],
                probe=trial.probe,
            ))
    return records


def run_experiment1(
    plan: ExperimentPlan,
    agent: AgentConfig,
    schedule: BetaSchedule,
    replications: int,
    seed: int,
    collect_records: int = 0,
) -> tuple:
    """Replay the time-permutation experiment over a population.

    Returns (metrics dict, records list); records only when requested.
    """
    if plan.experiment != "experiment1":
        raise ConfigError("run_experiment1 needs an experiment1 plan")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(1,)))
    data_terms, ai_terms, prior_term = _evidence_arrays(plan, agent)
    shown = np.array([t.shown_prediction for t in plan.trials])
    truth = np.array([t.true_label for t in plan.trials])
    probe = np.array([t.probe for t in plan.trials])

    block_of = np.empty(plan.n_trials, dtype=int)
    for b, members in enumerate(plan.block_ids):
        for i in members:
            block_of[i] = b

    perms = rng.permuted(
        np.tile(np.array(EXPERIMENT1_BLOCK_TIMES), (replications, 1)), axis=1
    )
    times = perms[:, block_of]
    betas = np.interp(times, np.array(schedule.times), np.array(schedule.betas))
    log_ratio = (
        agent.alpha * data_terms[None, :]
        + betas * ai_terms[None, :]
        + agent.gamma * prior_term
    )
    labels = _decide_matrix(log_ratio, agent.temperature, rng, shown)
    agree = labels == shown.astype(bool)
    correct = labels == truth.astype(bool)

    group = _group_metrics(plan, correct, agree)
    by_time = {}
    for t in EXPERIMENT1_BLOCK_TIMES:
        at_t = times == t
        probe_mask = at_t & probe[None, :]
        unmod_mask = at_t & ~probe[None, :]
        by_time[f"{t:g}"] = {
            "probe_disagreement": proportion(
                float((~agree & probe_mask).sum()), int(probe_mask.sum())
            ),
            "unmodified_disagreement": proportion(
                float((~agree & unmod_mask).sum()), int(unmod_mask.sum())
            ),
            "accuracy": proportion(float((correct & at_t).sum()), int(at_t.sum())),
        }
    group["by_time"] = by_time
    metrics = metrics_envelope("experiment1", seed, replications, {"collaborative": group})
    records = (
        _collect_records(plan, "collaborative", times, labels, correct, agree,
                         log_ratio, collect_records)
        if collect_records
        else []
    )
    return metrics, records


def run_experiment2(
    plan: ExperimentPlan,
    agent: AgentConfig,
    schedules: Mapping[str, Optional[BetaSchedule]],
    replications: int,
    seed: int,
    groups: Sequence[str] = GROUPS,
    t_low: float = 25.0,
    t_high: float = 10.0,
    collect_records: int = 0,
) -> tuple:
    """Simulate the five-group deployment over a shared trial slate."""
    if plan.experiment != "experiment2":
        raise ConfigError("run_experiment2 needs an experiment2 plan")
    for g in groups:
        if g not in GROUPS:
            raise ParameterError(f"unknown group {g!r}")
        if g != "human_only" and (g not in schedules or schedules[g] is None):
            raise ConfigError(f"group {g!r} has no calibrated anchoring schedule")

    data_terms, ai_terms, prior_term = _evidence_arrays(plan, agent)
    shown = np.array([t.shown_prediction for t in plan.trials])
    truth = np.array([t.true_label for t in plan.trials])
    bins_low = np.array([t.confidence_bin == "C_L" for t in plan.trials])

    out_groups: dict = {}
    records: list[TrialRecord] = []
    for gi, group in enumerate(groups):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(2, gi)))
        if group == "human_only":
            times = np.full((replications, plan.n_trials), 25.0)
        elif group == "constant":
            times = np.full((replications, plan.n_trials), (t_low + t_high) / 2.0)
        elif group == "random":
            half = EXPERIMENT2_BLOCKS // 2
            block_times = np.tile(np.array([t_high] * half + [t_low] * half), (replications, 1))
            block_times = rng.permuted(block_times, axis=1)
            # trials fall into blocks of five by a per-session permutation
            assignment = np.argsort(rng.random((replications, plan.n_trials)), axis=1)
            block_index = np.empty((replications, plan.n_trials), dtype=int)
            rows = np.arange(replications)[:, None]
            block_index[rows, assignment] = np.arange(plan.n_trials)[None, :] // 5
            times = np.take_along_axis(block_times, block_index, axis=1)
        else:
            times = np.where(bins_low[None, :], t_low, t_high)
            times = np.tile(times, (replications, 1)).astype(float)

        if group == "human_only":
            log_ratio = np.tile(
                agent.alpha * data_terms + agent.gamma * prior_term, (replications, 1)
            )
        else:
            schedule = schedules[group]
            betas = np.interp(times, np.array(schedule.times), np.array(schedule.betas))
            log_ratio = (
                agent.alpha * data_terms[None, :]
                + betas * ai_terms[None, :]
                + agent.gamma * prior_term
            )
        labels = _decide_matrix(log_ratio, agent.temperature, rng, shown)
        correct = labels == truth.astype(bool)
        agree = None if group == "human_only" else labels == shown.astype(bool)
        out_groups[group] = _group_metrics(plan, correct, agree)
        if collect_records:
            records.extend(_collect_records(
                plan, group, times, labels, correct, agree, log_ratio, collect_records
            ))
    metrics = metrics_envelope("experiment2", seed, replications, out_groups)
    return metrics, records


def run(plan, agent, schedules, replications, seed, **kwargs):
    """Dispatch on the plan's experiment tag."""
    if plan.experiment == "experiment1":
        if isinstance(schedules, Mapping):
            schedules = schedules.get("collaborative")
        if schedules is None:
            raise ConfigError("experiment1 needs one calibrated anchoring schedule")
        return run_experiment1(plan, agent, schedules, replications, seed, **kwargs)
    if plan.experiment == "experiment2":
        return run_experiment2(plan, agent, schedules, replications, seed, **kwargs)
    raise ConfigError(f"unknown experiment {plan.experiment!r}")


def probe_source(plan: ExperimentPlan) -> EmpiricalSource:
    """Probe-trial observation distribution, the calibration target source."""
    observations = plan.probe_observations()
    if not observations:
        raise ConfigError("plan has no probe trials")
    return EmpiricalSource(observations)


def conditional_source(
    plan: ExperimentPlan, confidence_bin=None, shown_correct=None
) -> EmpiricalSource:
    observations = plan.conditional_observations(confidence_bin, shown_correct)
    if not observations:
        raise ConfigError(
            f"plan has no trials with bin={confidence_bin} shown_correct={shown_correct}"
        )
    return EmpiricalSource(observations)
