"""Budgeted time allocation over binary-confidence trials.

Per-trial expected team correctness decomposes over whether the shown
prediction is right, with the two conditional agreement probabilities
carrying the whole time dependence.  Binarizing model confidence gives
one reward-vs-time curve per bin; when the low-confidence curve is
non-decreasing and the high-confidence curve non-increasing, the
optimal two-level policy gives every high-confidence trial the minimum
allowable time and spends the slack on the low-confidence trials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    BudgetError,
    DegenerateSplitError,
    ParameterError,
    TimeCapError,
)
from .response import AgreementCurve
from .schema import check_envelope, envelope

POLICY_KINDS = ("constant", "random", "confidence_based", "confidence_based_explained")
BIN_LOW = "C_L"
BIN_HIGH = "C_H"


@dataclass(frozen=True)
class TimeBudget:
    """Total seconds, trial count, floor time and optional ceiling."""

    total_time: float
    trials: int
    t_min: float = 0.0
    t_cap: Optional[float] = None

    def __post_init__(self):
        if self.total_time <= 0:
            raise ParameterError("total_time must be positive")
        if self.trials < 1:
            raise ParameterError("trials must be at least 1")
        if not (0 <= self.t_min <= self.per_trial):
            raise ParameterError(
                f"t_min must lie in [0, {self.per_trial}] (the per-trial average)"
            )
        if self.t_cap is not None and self.t_cap < self.per_trial:
            raise ParameterError("t_cap below the per-trial average is infeasible")

    @property
    def per_trial(self) -> float:
        return self.total_time / self.trials

    def to_payload(self) -> dict:
        out = {"total_time": self.total_time, "trials": self.trials, "t_min": self.t_min}
        if self.t_cap is not None:
            out["t_cap"] = self.t_cap
        return out

    @classmethod
    def from_payload(cls, payload) -> "TimeBudget":
        return cls(
            total_time=float(payload["total_time"]),
            trials=int(payload["trials"]),
            t_min=float(payload.get("t_min", 0.0)),
            t_cap=payload.get("t_cap"),
        )


@dataclass(frozen=True)
class ConfidenceSplit:
    """Probability of the low-confidence bin (and optional bin accuracies)."""

    p_low: float
    ai_accuracy_low: Optional[float] = None
    ai_accuracy_high: Optional[float] = None

    def __post_init__(self):
        if not (0.0 <= self.p_low <= 1.0):
            raise ParameterError("p_low must lie in [0, 1]")
        for name in ("ai_accuracy_low", "ai_accuracy_high"):
            v = getattr(self, name)
            if v is not None and not (0.0 <= v <= 1.0):
                raise ParameterError(f"{name} must lie in [0, 1]")

    @property
    def p_high(self) -> float:
        return 1.0 - self.p_low


class RewardCurves:
    """Expected team correctness vs. seconds, one curve per bin.

    Values live on a finite grid with linear interpolation and constant
    extrapolation; the allocator's premise is checked on this grid.
    """

    def __init__(self, times: Sequence[float], low: Sequence[float], high: Sequence[float]):
        self.times = np.asarray([float(t) for t in times])
        self.low = np.asarray([float(v) for v in low])
        self.high = np.asarray([float(v) for v in high])
        if not (len(self.times) == len(self.low) == len(self.high)):
            raise ParameterError("grid arrays must have equal length")
        if len(self.times) < 2:
            raise ParameterError("reward curves need at least two grid points")
        if np.any(np.diff(self.times) <= 0):
            raise ParameterError("grid times must be strictly increasing")
        for name, vals in (("low", self.low), ("high", self.high)):
            if np.any((vals < 0.0) | (vals > 1.0)):
                raise ParameterError(f"{name} rewards must lie in [0, 1]")

    def value_low(self, t: float) -> float:
        return float(np.interp(t, self.times, self.low))

    def value_high(self, t: float) -> float:
        return float(np.interp(t, self.times, self.high))

    def value(self, t: float, bin_name: str) -> float:
        if bin_name == BIN_LOW:
            return self.value_low(t)
        if bin_name == BIN_HIGH:
            return self.value_high(t)
        raise ParameterError(f"unknown bin {bin_name!r}")

    @classmethod
    def from_agreement(
        cls,
        curve: AgreementCurve,
        ai_accuracy_low: float,
        ai_accuracy_high: float,
        grid: Sequence[float],
    ) -> "RewardCurves":
        """Evaluate the conditional-reward identity per bin over a grid."""
        low = [expected_reward_given_time(t, curve, ai_accuracy_low) for t in grid]
        high = [expected_reward_given_time(t, curve, ai_accuracy_high) for t in grid]
        return cls(grid, low, high)

    def to_json(self) -> dict:
        return envelope(
            "reward_curves",
            {"times": self.times.tolist(), "low": self.low.tolist(), "high": self.high.tolist()},
        )

    @classmethod
    def from_json(cls, data) -> "RewardCurves":
        data = check_envelope(data, "reward_curves")
        return cls(data["times"], data["low"], data["high"])


def expected_reward(p_ai_correct: float, p_agree_right: float, p_agree_wrong: float) -> float:
    """Team correctness from AI correctness and the two agreement terms.

    Agreeing with a correct prediction or disagreeing with a wrong one
    are the two ways the pair ends up right.
    """
    for name, v in (
        ("p_ai_correct", p_ai_correct),
        ("p_agree_right", p_agree_right),
        ("p_agree_wrong", p_agree_wrong),
    ):
        if not (0.0 <= v <= 1.0):
            raise ParameterError(f"{name} must lie in [0, 1], got {v}")
    return p_agree_right * p_ai_correct + (1.0 - p_agree_wrong) * (1.0 - p_ai_correct)


def expected_reward_given_time(t: float, curve: AgreementCurve, p_ai_correct: float) -> float:
    """Reward with both agreement terms read off the curve at time t."""
    if t < 0:
        raise ParameterError("time must be nonnegative")
    return expected_reward(p_ai_correct, curve.when_right(t), curve.when_wrong(t))


def decompose_conditional_accuracy(
    agree_given_correct: float,
    p_ai_correct: float,
    disagree_given_wrong: float,
) -> float:
    """Bin-conditional accuracy as its two-branch mixture.

    Identical arithmetic to :func:`expected_reward` with the wrong
    branch already expressed as a disagreement probability.
    """
    return expected_reward(p_ai_correct, agree_given_correct, 1.0 - disagree_given_wrong)


def solve_confidence_allocation(budget: TimeBudget, p_low: float) -> tuple:
    """Optimal two-level times: floor on high confidence, slack on low.

    Solves  t_low * p_low + t_min * (1 - p_low) = per-trial average.
    """
    if not (0.0 <= p_low <= 1.0):
        raise ParameterError("p_low must lie in [0, 1]")
    if p_low == 0.0:
        raise DegenerateSplitError(
            "p_low = 0: every trial is high-confidence, no budget slack is usable"
        )
    t_high = budget.t_min
    t_low = (budget.per_trial - t_high * (1.0 - p_low)) / p_low
    if budget.t_cap is not None and t_low > budget.t_cap + 1e-12:
        feasible_t_min = (budget.per_trial - p_low * budget.t_cap) / (1.0 - p_low)
        raise TimeCapError(
            f"solved t_low {t_low:.3f}s exceeds the cap {budget.t_cap:.3f}s; "
            f"raising t_min to at least {feasible_t_min:.3f}s would satisfy it",
            feasible_t_min=feasible_t_min,
        )
    return t_low, t_high


@dataclass(frozen=True)
class AllocationPolicy:
    """Budget-feasible per-trial time assignment.

    ``assign`` maps a sequence of confidence bins to seconds; the random
    kind fixes exactly round(n * p_low) slots at the long time so each
    full assignment meets the budget identically, not just on average.
    """

    kind: str
    budget: TimeBudget
    p_low: float
    t_low: float
    t_high: float

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ParameterError(f"kind must be one of {POLICY_KINDS}")
        expected = self.p_low * self.t_low + (1.0 - self.p_low) * self.t_high
        if abs(expected - self.budget.per_trial) > 1e-9:
            raise BudgetError(
                f"policy violates the budget identity: p_low*t_low + p_high*t_high = "
                f"{expected!r} != per-trial average {self.budget.per_trial!r}"
            )

    @property
    def expected_per_trial_time(self) -> float:
        return self.p_low * self.t_low + (1.0 - self.p_low) * self.t_high

    def assign(
        self,
        bins: Sequence[str],
        rng: Optional[np.random.Generator] = None,
    ) -> np.ndarray:
        n = len(bins)
        if self.kind == "constant":
            return np.full(n, self.budget.per_trial)
        if self.kind in ("confidence_based", "confidence_based_explained"):
            return np.array([self.t_low if b == BIN_LOW else self.t_high for b in bins])
        if rng is None:
            raise ParameterError("the random policy needs a seeded generator")
        n_long = int(round(n * self.p_low))
        times = np.full(n, self.t_high)
        times[rng.permutation(n)[:n_long]] = self.t_low
        return times

    def to_json(self) -> dict:
        return envelope(
            "allocation_policy",
            {
                "policy": self.kind,
                "budget": self.budget.to_payload(),
                "p_low": self.p_low,
                "t_low": self.t_low,
                "t_high": self.t_high,
            },
        )

    @classmethod
    def from_json(cls, data) -> "AllocationPolicy":
        data = check_envelope(data, "allocation_policy")
        return cls(
            kind=data["policy"],
            budget=TimeBudget.from_payload(data["budget"]),
            p_low=float(data["p_low"]),
            t_low=float(data["t_low"]),
            t_high=float(data["t_high"]),
        )


def constant_policy(budget: TimeBudget, p_low: float = 0.5) -> AllocationPolicy:
    t = budget.per_trial
    return AllocationPolicy("constant", budget, p_low, t, t)


def confidence_policy(
    budget: TimeBudget, p_low: float, explained: bool = False
) -> AllocationPolicy:
    t_low, t_high = solve_confidence_allocation(budget, p_low)
    kind = "confidence_based_explained" if explained else "confidence_based"
    return AllocationPolicy(kind, budget, p_low, t_low, t_high)


def random_policy(budget: TimeBudget, p_low: float) -> AllocationPolicy:
    """Same two levels as the confidence policy, dealt out at random."""
    t_low, t_high = solve_confidence_allocation(budget, p_low)
    return AllocationPolicy("random", budget, p_low, t_low, t_high)


def team_reward(
    policy: AllocationPolicy, split: ConfidenceSplit, curves: RewardCurves
) -> float:
    """Analytic expected per-trial correctness of the team under a policy."""
    if abs(policy.p_low - split.p_low) > 1e-9:
        raise BudgetError(
            f"policy was built for p_low={policy.p_low}, split has {split.p_low}; "
            "the budget identity would not hold"
        )
    p_low, p_high = split.p_low, split.p_high
    if policy.kind == "constant":
        t = policy.budget.per_trial
        return p_low * curves.value_low(t) + p_high * curves.value_high(t)
    if policy.kind in ("confidence_based", "confidence_based_explained"):
        return p_low * curves.value_low(policy.t_low) + p_high * curves.value_high(policy.t_high)
    # random: time level is independent of the bin
    p_t_low = p_low  # fraction of slots at the long time
    return (
        p_low * p_t_low * curves.value_low(policy.t_low)
        + p_low * (1 - p_t_low) * curves.value_low(policy.t_high)
        + p_high * p_t_low * curves.value_high(policy.t_low)
        + p_high * (1 - p_t_low) * curves.value_high(policy.t_high)
    )


def simulate_team_reward(
    policy: AllocationPolicy,
    split: ConfidenceSplit,
    curves: RewardCurves,
    trials: int = 100_000,
    seed: int = 0,
) -> tuple:
    """Monte Carlo check of :func:`team_reward`: (estimate, standard error)."""
    rng = np.random.default_rng(seed)
    bins = np.where(rng.random(trials) < split.p_low, BIN_LOW, BIN_HIGH)
    times = policy.assign(list(bins), rng)
    p_correct = np.array(
        [curves.value(t, b) for t, b in zip(times, bins)]
    )
    correct = rng.random(trials) < p_correct
    estimate = float(correct.mean())
    se = math.sqrt(max(estimate * (1 - estimate), 1e-12) / trials)
    return estimate, se


@dataclass(frozen=True)
class Assumption1Report:
    """Grid monotonicity of the two reward curves, violations listed."""

    holds: bool
    violations: tuple

    def to_payload(self) -> dict:
        return {"holds": self.holds, "violations": [list(v) for v in self.violations]}


def check_assumption1(curves: RewardCurves, tolerance: float = 0.0) -> Assumption1Report:
    """Verify low-bin reward non-decreasing and high-bin non-increasing.

    Violations are reported, not raised: a failed premise is a finding
    about the configuration, and the comparison report carries it.
    """
    violations = []
    for (t1, v1), (t2, v2) in zip(
        zip(curves.times, curves.low), zip(curves.times[1:], curves.low[1:])
    ):
        if v2 < v1 - tolerance:
            violations.append(("low", float(t1), float(t2), float(v1), float(v2)))
    for (t1, v1), (t2, v2) in zip(
        zip(curves.times, curves.high), zip(curves.times[1:], curves.high[1:])
    ):
        if v2 > v1 + tolerance:
            violations.append(("high", float(t1), float(t2), float(v1), float(v2)))
    return Assumption1Report(holds=not violations, violations=tuple(violations))


@dataclass(frozen=True)
class PolicyComparison:
    rewards: dict
    ranking: tuple
    confidence_dominates: bool
    assumption: Assumption1Report
    t_low: float
    t_high: float

    def to_json(self) -> dict:
        return envelope(
            "policy_comparison",
            {
                "rewards": dict(self.rewards),
                "ranking": list(self.ranking),
                "confidence_dominates": self.confidence_dominates,
                "assumption1": self.assumption.to_payload(),
                "t_low": self.t_low,
                "t_high": self.t_high,
            },
        )


def compare_policies(
    split: ConfidenceSplit, curves: RewardCurves, budget: TimeBudget
) -> PolicyComparison:
    """Analytic rewards for the three allocation strategies, ranked.

    Flags whether the confidence-based policy weakly dominates both
    baselines and whether the monotonicity premise held on the grid.
    """
    conf = confidence_policy(budget, split.p_low)
    rewards = {
        "confidence_based": team_reward(conf, split, curves),
        "constant": team_reward(constant_policy(budget, split.p_low), split, curves),
        "random": team_reward(random_policy(budget, split.p_low), split, curves),
    }
    ranking = tuple(sorted(rewards, key=lambda k: -rewards[k]))
    dominates = rewards["confidence_based"] >= max(
        rewards["constant"], rewards["random"]
    ) - 1e-12
    return PolicyComparison(
        rewards=rewards,
        ranking=ranking,
        confidence_dominates=dominates,
        assumption=check_assumption1(curves),
        t_low=conf.t_low,
        t_high=conf.t_high,
    )


def grid_search_two_level(
    split: ConfidenceSplit,
    curves: RewardCurves,
    budget: TimeBudget,
    resolution: float = 0.5,
) -> tuple:
    """Best budget-feasible two-level policy by exhaustive search.

    Sweeps the high-confidence time from t_min up to the point where the
    implied low-confidence time hits zero; returns (t_low, t_high,
    reward) of the best grid point.
    """
    if split.p_low == 0.0:
        raise DegenerateSplitError("p_low = 0 admits only the constant policy")
    best = None
    t_high = budget.t_min
    limit = budget.per_trial / (1.0 - split.p_low) if split.p_low < 1.0 else budget.per_trial
    while t_high <= limit + 1e-9:
        t_low = (budget.per_trial - (1.0 - split.p_low) * t_high) / split.p_low
        if t_low < -1e-9:
            break
        t_low = max(t_low, 0.0)
        reward = split.p_low * curves.value_low(t_low) + split.p_high * curves.value_high(t_high)
        if best is None or reward > best[2]:
            best = (t_low, t_high, reward)
        t_high += resolution
    return best
