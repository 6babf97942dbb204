"""Experiment plans, the population simulation, and its invariants."""

import json

import numpy as np
import pytest

from anchortime.errors import ConfigError, SamplingError
from anchortime.harness import (
    EXPERIMENT1_BLOCK_TIMES,
    ExperimentPlan,
    TrialSpec,
    build_experiment1_plan,
    build_experiment2_plan,
    build_training_trials,
    conditional_source,
    experiment1_session_plan,
    experiment2_session_plan,
    fit_subjective_model,
    probe_source,
    run,
    run_experiment1,
    run_experiment2,
)
from anchortime.metrics import aggregate_records
from anchortime.response import BetaSchedule, calibrate_beta, default_experiment1_curve
from anchortime.workflows import experiment1_workflow, experiment2_workflow


@pytest.fixture(scope="module")
def plan1(bundle):
    return build_experiment1_plan(
        bundle.model10,
        bundle.dataset10.test_records(),
        list(bundle.dataset10.y_test),
        bundle.selected_features,
        seed=5,
    )


@pytest.fixture(scope="module")
def plan2(bundle):
    return build_experiment2_plan(
        bundle.model7,
        bundle.dataset7.test_records(),
        list(bundle.dataset7.y_test),
        bundle.selected_features,
        seed=11,
    )


@pytest.fixture(scope="module")
def schedule1(bundle, plan1):
    return calibrate_beta(
        default_experiment1_curve(), bundle.agent, probe_source(plan1),
        knot_times=(10, 15, 20, 25),
    )


# ---------------------------------------------------------------------------
# Experiment 1 plan
# ---------------------------------------------------------------------------


def test_plan1_composition(plan1):
    assert plan1.n_trials == 36
    probes = [t for t in plan1.trials if t.probe]
    assert len(probes) == 8
    for block in plan1.block_ids:
        members = [plan1.trials[i] for i in block]
        assert len(members) == 9
        assert sum(t.probe for t in members) == 2


def test_probe_trials_are_flipped_medium_difficulty(plan1):
    for t in plan1.trials:
        if t.probe:
            assert 0.6 < t.confidence <= 0.8
            assert t.shown_prediction == 1 - int(t.model_p_class1 >= 0.5)
            assert not t.shown_correct


def test_trial_order_shared_but_times_permuted(plan1):
    s1 = experiment1_session_plan(plan1, permutation_seed=1)
    s2 = experiment1_session_plan(plan1, permutation_seed=2)
    assert s1.trial_order == s2.trial_order
    assert sorted(set(s1.allocated_seconds)) == sorted(EXPERIMENT1_BLOCK_TIMES)
    assert s1.allocated_seconds != s2.allocated_seconds
    again = experiment1_session_plan(plan1, permutation_seed=1)
    assert again.allocated_seconds == s1.allocated_seconds
    # within a block the time is constant
    for block in plan1.block_ids:
        times = {s1.allocated_seconds[i] for i in block}
        assert len(times) == 1


def test_shown_ai_accuracy_near_reported_average(bundle):
    # 21/36 in expectation; averaged over seeds to wash sampling noise
    values = []
    for seed in range(30):
        plan = build_experiment1_plan(
            bundle.model10, bundle.dataset10.test_records(), list(bundle.dataset10.y_test),
            bundle.selected_features, seed=seed,
        )
        values.append(np.mean([t.shown_correct for t in plan.trials]))
    assert np.mean(values) == pytest.approx(0.583, abs=0.06)


def test_insufficient_pool_names_interval(bundle):
    with pytest.raises(SamplingError, match=r"\(0\.6, 0\.8\]"):
        build_experiment1_plan(
            bundle.model10, bundle.dataset10.test_records()[:6],
            list(bundle.dataset10.y_test)[:6], bundle.selected_features, seed=0,
        )


def test_plan_round_trip(plan1):
    data = json.loads(json.dumps(plan1.to_json()))
    again = ExperimentPlan.from_json(data)
    assert again.n_trials == plan1.n_trials
    assert again.block_ids == plan1.block_ids
    for a, b in zip(again.trials, plan1.trials):
        assert a.observation.features == b.observation.features
        assert a.shown_prediction == b.shown_prediction
        assert a.confidence == pytest.approx(b.confidence)
        assert a.probe == b.probe


# ---------------------------------------------------------------------------
# Experiment 2 plan
# ---------------------------------------------------------------------------


def test_plan2_bin_composition(plan2):
    assert plan2.n_trials == 40
    bins = [t.confidence_bin for t in plan2.trials]
    assert bins.count("C_L") == 20
    assert bins.count("C_H") == 20
    assert not any(t.probe for t in plan2.trials)


def test_group_session_times(plan2):
    human = experiment2_session_plan(plan2, "human_only", 7)
    assert set(human.allocated_seconds) == {25.0}
    constant = experiment2_session_plan(plan2, "constant", 7)
    assert set(constant.allocated_seconds) == {17.5}
    random_plan = experiment2_session_plan(plan2, "random", 7)
    assert np.mean(random_plan.allocated_seconds) == pytest.approx(17.5, abs=1e-12)
    assert sorted(set(random_plan.allocated_seconds)) == [10.0, 25.0]
    for group in ("confidence", "confidence_explained"):
        plan = experiment2_session_plan(plan2, group, 7)
        for position, seconds in zip(plan.trial_order, plan.allocated_seconds):
            expected = 25.0 if plan2.trials[position].confidence_bin == "C_L" else 10.0
            assert seconds == expected


def test_blocks_of_five_share_time(plan2):
    for group in ("random", "confidence", "confidence_explained"):
        session = experiment2_session_plan(plan2, group, 3)
        for start in range(0, 40, 5):
            block_times = set(session.allocated_seconds[start: start + 5])
            assert len(block_times) == 1


def test_every_trial_appears_once_per_session(plan2):
    for group in ("human_only", "constant", "random", "confidence"):
        session = experiment2_session_plan(plan2, group, 13)
        assert sorted(session.trial_order) == list(range(40))


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------


def test_run_is_deterministic(plan1, bundle, schedule1):
    a, _ = run_experiment1(plan1, bundle.agent, schedule1, replications=200, seed=42)
    b, _ = run_experiment1(plan1, bundle.agent, schedule1, replications=200, seed=42)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    c, _ = run_experiment1(plan1, bundle.agent, schedule1, replications=200, seed=43)
    assert json.dumps(a, sort_keys=True) != json.dumps(c, sort_keys=True)


def test_full_anchoring_limit(plan1, bundle):
    frozen = BetaSchedule(times=(10.0, 25.0), betas=(1e6, 1e6))
    metrics, _ = run_experiment1(plan1, bundle.agent, frozen, replications=300, seed=1)
    group = metrics["groups"]["collaborative"]
    assert group["agreement"]["value"] == 1.0
    shown_accuracy = np.mean([t.shown_correct for t in plan1.trials])
    assert group["accuracy"]["value"] == pytest.approx(shown_accuracy, abs=1e-12)
    for stratum in group["strata"].values():
        if stratum is not None:
            assert stratum["agreement"]["value"] == 1.0


def test_round_trip_fidelity_at_every_knot(plan1, bundle, schedule1):
    curve = default_experiment1_curve()
    metrics, _ = run_experiment1(plan1, bundle.agent, schedule1, replications=10_000, seed=99)
    by_time = metrics["groups"]["collaborative"]["by_time"]
    for t in (10, 15, 20, 25):
        entry = by_time[f"{t:g}"]["probe_disagreement"]
        target = 1.0 - curve.when_wrong(t)
        tolerance = max(schedule1.residual, 3 * entry["se"])
        assert abs(entry["value"] - target) <= tolerance


def test_human_only_accuracy_ignores_shown_predictions(plan2, bundle):
    flipped_trials = []
    for t in plan2.trials:
        flipped = TrialSpec(
            trial_id=t.trial_id,
            observation=type(t.observation)(t.observation.features, 1 - t.shown_prediction),
            display_features=t.display_features,
            true_label=t.true_label,
            shown_prediction=1 - t.shown_prediction,
            model_p_class1=t.model_p_class1,
            confidence=t.confidence,
            confidence_bin=t.confidence_bin,
            probe=False,
            stratum=t.stratum,
        )
        flipped_trials.append(flipped)
    flipped_plan = ExperimentPlan(
        experiment="experiment2", trials=tuple(flipped_trials),
        block_ids=plan2.block_ids, seed=plan2.seed,
    )
    a, _ = run_experiment2(plan2, bundle.agent, {}, 500, 5, groups=("human_only",))
    b, _ = run_experiment2(flipped_plan, bundle.agent, {}, 500, 5, groups=("human_only",))
    assert a["groups"]["human_only"]["accuracy"]["value"] == \
        b["groups"]["human_only"]["accuracy"]["value"]
    assert a["groups"]["human_only"]["agreement"] is None


def test_missing_calibration_is_a_config_error(plan2, bundle):
    with pytest.raises(ConfigError, match="schedule"):
        run_experiment2(plan2, bundle.agent, {}, 10, 0, groups=("constant",))


def test_stratum_counts_partition_trials(plan2, bundle, schedule1):
    schedules = {g: schedule1 for g in ("constant", "random", "confidence", "confidence_explained")}
    metrics, _ = run_experiment2(plan2, bundle.agent, schedules, replications=50, seed=3)
    for group, gm in metrics["groups"].items():
        total = sum(s["n"] for s in gm["strata"].values() if s is not None)
        assert total == gm["n_trials"]


def test_streaming_aggregates_match_record_recount(plan2, bundle, schedule1):
    replications = 40
    schedules = {g: schedule1 for g in ("constant", "random", "confidence", "confidence_explained")}
    metrics, records = run_experiment2(
        plan2, bundle.agent, schedules, replications=replications, seed=9,
        groups=("constant", "confidence"), collect_records=replications,
    )
    for group in ("constant", "confidence"):
        group_records = [r for r in records if r.group == group]
        recount = aggregate_records(group_records)
        gm = metrics["groups"][group]
        assert recount["accuracy"]["value"] == gm["accuracy"]["value"]
        assert recount["agreement"]["value"] == gm["agreement"]["value"]
        for key, stratum in gm["strata"].items():
            if stratum is None:
                assert recount["strata"][key] is None
            else:
                assert recount["strata"][key]["accuracy"]["value"] == \
                    stratum["accuracy"]["value"]
                assert recount["strata"][key]["n"] == stratum["n"]


def test_self_confidence_terciles_present(plan2, bundle, schedule1):
    schedules = {"constant": schedule1}
    _, records = run_experiment2(
        plan2, bundle.agent, schedules, replications=3, seed=1,
        groups=("constant",), collect_records=3,
    )
    per_session = {}
    for r in records:
        per_session.setdefault(r.session_id, []).append(r.self_confidence)
    for values in per_session.values():
        assert set(values) <= {"low", "medium", "high"}
        assert values.count("low") == pytest.approx(len(values) / 3, abs=1)


def test_run_dispatches_on_experiment(plan1, plan2, bundle, schedule1):
    m1, _ = run(plan1, bundle.agent, schedule1, 50, 0)
    assert m1["experiment"] == "experiment1"
    schedules = {g: schedule1 for g in ("constant", "random", "confidence", "confidence_explained")}
    m2, _ = run(plan2, bundle.agent, schedules, 50, 0)
    assert m2["experiment"] == "experiment2"


# ---------------------------------------------------------------------------
# Directional findings (smaller-scale versions of the acceptance runs)
# ---------------------------------------------------------------------------


def test_anchoring_harm_and_explained_deanchoring(bundle):
    result = experiment2_workflow(bundle, replications=2000, sim_seed=77)
    groups = result.metrics["groups"]

    def pooled_wrong_accuracy(gm):
        total = n = 0.0
        for key in ("C_L|ai_wrong", "C_H|ai_wrong"):
            s = gm["strata"][key]
            if s is not None:
                total += s["accuracy"]["value"] * s["n"]
                n += s["n"]
        return total / n

    human = pooled_wrong_accuracy(groups["human_only"])
    for group in ("constant", "random", "confidence", "confidence_explained"):
        assert pooled_wrong_accuracy(groups[group]) < human

    explained = groups["confidence_explained"]["strata"]["C_L|ai_wrong"]["accuracy"]["value"]
    for group in ("constant", "random", "confidence"):
        other = groups[group]["strata"]["C_L|ai_wrong"]["accuracy"]["value"]
        assert explained > other


def test_experiment1_workflow_reproduces_curve(bundle):
    result = experiment1_workflow(bundle, replications=2000, sim_seed=31)
    by_time = result.metrics["groups"]["collaborative"]["by_time"]
    assert by_time["10"]["probe_disagreement"]["value"] == pytest.approx(0.48, abs=0.04)
    assert by_time["25"]["probe_disagreement"]["value"] == pytest.approx(0.67, abs=0.04)


# ---------------------------------------------------------------------------
# Subjective model and training trials
# ---------------------------------------------------------------------------


def test_subjective_model_prior_matches_base_rate(bundle):
    prior, likelihood, ai = fit_subjective_model(
        bundle.dataset10.train_records(), list(bundle.dataset10.y_train),
        bundle.selected_features,
    )
    assert prior.p1 == pytest.approx(np.mean(bundle.dataset10.y_train), abs=1e-9)
    assert set(likelihood.features) == set(bundle.selected_features)
    assert ai[1][1] == pytest.approx(0.85)
    assert ai.is_diagonally_dominant


def test_training_trials_spread_over_difficulty(bundle):
    trials = build_training_trials(
        bundle.model7, bundle.dataset7.train_records(), list(bundle.dataset7.y_train),
        bundle.selected_features, seed=17,
    )
    assert len(trials) == 15
    strata = [t.stratum for t in trials]
    assert len(set(strata)) == 5


def test_conditional_source_filters(plan2):
    source = conditional_source(plan2, confidence_bin="C_L", shown_correct=False)
    count = sum(
        1 for t in plan2.trials if t.confidence_bin == "C_L" and not t.shown_correct
    )
    assert source.enumeration_size() == count
