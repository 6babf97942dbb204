"""Anchored decision-making, time-based de-anchoring, and budgeted
time allocation for human-AI teams.

The package has four layers: ``biasbayes`` (exponent-weighted Bayesian
decisions and agreement probabilities), ``dataset``/``classifier`` (the
student-performance assistant), ``response``/``allocation`` (time
curves, anchoring-weight calibration, and the confidence-based
allocator), and ``harness``/``service`` (simulated and live sessions).
"""

from .allocation import (
    AllocationPolicy,
    ConfidenceSplit,
    RewardCurves,
    TimeBudget,
    check_assumption1,
    compare_policies,
    confidence_policy,
    constant_policy,
    decompose_conditional_accuracy,
    expected_reward,
    expected_reward_given_time,
    grid_search_two_level,
    random_policy,
    simulate_team_reward,
    solve_confidence_allocation,
    team_reward,
)
from .biasbayes import (
    AgreementEstimate,
    AiOutputTable,
    BiasProfile,
    Decision,
    EmpiricalSource,
    FeatureLikelihoodTable,
    LabelPrior,
    Observation,
    WorldSource,
    agreement_probability,
    decide,
    posterior_log_ratio,
    simulate_decision,
)
from .classifier import (
    AiAdvice,
    LinearClassifier,
    TrainingConfig,
    advise,
    feature_importance,
    rank_and_select_features,
    reduced_feature_set,
    train,
)
from .dataset import RawStudentRecord, ingest, prepare
from .response import (
    AgentConfig,
    AgreementCurve,
    BetaSchedule,
    assumption_demo_curve,
    calibrate_beta,
    default_experiment1_curve,
    experiment2_collaborative_curve,
    experiment2_explained_curve,
    fitted_slope,
)

__version__ = "0.1.0"
