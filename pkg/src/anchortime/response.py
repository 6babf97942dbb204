"""Time-conditioned agreement curves and the anchoring-weight schedule.

The first timed experiment yields two empirical curves: agreement with
the shown prediction when it is correct, and when it is wrong, both as
functions of the seconds allocated to the trial.  ``calibrate_beta``
inverts one of those curves through the biased-Bayes agent: for each
knot time it finds the anchoring weight whose predicted agreement on a
trial distribution matches the curve, giving a monotone schedule
t -> beta(t) that the simulation harness replays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .biasbayes import (
    AiOutputTable,
    BiasProfile,
    FeatureLikelihoodTable,
    LabelPrior,
    TrialSource,
    agreement_probability,
)
from .errors import CalibrationError, ModelError, ParameterError
from .schema import check_envelope, envelope

# Monotonicity slack for the agree-when-right side: the finding is
# "non-increasing or flat", checked up to fitted noise of this size.
RIGHT_SIDE_TOLERANCE = 0.02


def _interp(t: float, times: np.ndarray, values: np.ndarray) -> float:
    return float(np.clip(np.interp(t, times, values), 0.0, 1.0))


@dataclass(frozen=True)
class AgreementCurve:
    """Conditional agreement vs. allocated seconds, piecewise linear.

    Evaluation clamps to [0, 1] and extrapolates as a constant beyond
    the end knots.
    """

    times: tuple
    agree_when_right: tuple
    agree_when_wrong: tuple

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        right = tuple(float(v) for v in self.agree_when_right)
        wrong = tuple(float(v) for v in self.agree_when_wrong)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "agree_when_right", right)
        object.__setattr__(self, "agree_when_wrong", wrong)
        if not (len(times) == len(right) == len(wrong)):
            raise ParameterError("knot arrays must have equal length")
        if len(times) < 1:
            raise ParameterError("curve needs at least one knot")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ParameterError("knot times must be strictly increasing")
        for name, vals in (("agree_when_right", right), ("agree_when_wrong", wrong)):
            if any(not (0.0 <= v <= 1.0) for v in vals):
                raise ModelError(f"{name} values must lie in [0, 1]")
        if any(b > a + 1e-12 for a, b in zip(wrong, wrong[1:])):
            raise ModelError("agree-when-wrong must be non-increasing in time")
        if any(b > a + RIGHT_SIDE_TOLERANCE for a, b in zip(right, right[1:])):
            raise ModelError(
                "agree-when-right must be non-increasing in time "
                f"(tolerance {RIGHT_SIDE_TOLERANCE})"
            )

    def when_right(self, t: float) -> float:
        return _interp(t, np.array(self.times), np.array(self.agree_when_right))

    def when_wrong(self, t: float) -> float:
        return _interp(t, np.array(self.times), np.array(self.agree_when_wrong))

    def value(self, t: float, side: str) -> float:
        if side == "wrong":
            return self.when_wrong(t)
        if side == "right":
            return self.when_right(t)
        raise ParameterError(f"side must be 'right' or 'wrong', got {side!r}")

    def to_json(self) -> dict:
        return envelope(
            "agreement_curve",
            {
                "times": list(self.times),
                "agree_when_right": list(self.agree_when_right),
                "agree_when_wrong": list(self.agree_when_wrong),
            },
        )

    @classmethod
    def from_json(cls, data) -> "AgreementCurve":
        data = check_envelope(data, "agreement_curve")
        return cls(
            times=tuple(data["times"]),
            agree_when_right=tuple(data["agree_when_right"]),
            agree_when_wrong=tuple(data["agree_when_wrong"]),
        )


def default_experiment1_curve() -> AgreementCurve:
    """Curve measured in the first timed experiment.

    Probe-side agreement falls from 0.52 at 10 s to 0.33 at 25 s (the
    complements of the observed disagreement percentages); agreement on
    unmodified trials stays flat at 0.90.
    """
    return AgreementCurve(
        times=(10.0, 25.0),
        agree_when_right=(0.90, 0.90),
        agree_when_wrong=(0.52, 0.33),
    )


def experiment2_collaborative_curve() -> AgreementCurve:
    """Curve variant for the unexplained collaborative groups.

    Knots derive from the second experiment's low-confidence AI-wrong
    accuracies (34.9/36.4/37.5 percent at 10/17.5/25 s, the first value
    implied by the random group's 36.2 mixture), i.e. time alone barely
    de-anchors.
    """
    return AgreementCurve(
        times=(10.0, 17.5, 25.0),
        agree_when_right=(0.90, 0.90, 0.90),
        agree_when_wrong=(0.651, 0.636, 0.625),
    )


def experiment2_explained_curve() -> AgreementCurve:
    """Variant for the group told why time is allocated.

    Scenario input, not a derived quantity: the 25 s knot encodes 0.438
    disagreement-when-wrong (accuracy on low-confidence AI-wrong trials)
    against 0.375 without the explanation.
    """
    return AgreementCurve(
        times=(10.0, 25.0),
        agree_when_right=(0.90, 0.90),
        agree_when_wrong=(0.651, 0.562),
    )


def assumption_demo_curve() -> AgreementCurve:
    """Configuration satisfying the allocator's monotonicity premise.

    The agree-when-right side must fall with time (de-anchoring also
    costs accuracy when the prediction is right) for reward to be
    decreasing in time on high-confidence trials.
    """
    return AgreementCurve(
        times=(10.0, 25.0),
        agree_when_right=(0.93, 0.82),
        agree_when_wrong=(0.52, 0.33),
    )


def fitted_slope(curve: AgreementCurve, times: Sequence[float] = (10, 15, 20, 25)) -> float:
    """Least-squares slope of disagreement-when-wrong against seconds."""
    times = [float(t) for t in times]
    if len(set(times)) < 2:
        raise ParameterError("slope needs at least two distinct times")
    disagreement = [1.0 - curve.when_wrong(t) for t in times]
    slope, _ = np.polyfit(times, disagreement, 1)
    return float(slope)


@dataclass(frozen=True)
class BetaSchedule:
    """Anchoring weight per allocated time, linear between knots.

    Non-increasing: more time means weaker anchoring.  ``residual`` is
    the root-mean-square gap between achieved and target agreement at
    the knots after the monotone projection.
    """

    times: tuple
    betas: tuple
    residual: float = 0.0

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        betas = tuple(float(b) for b in self.betas)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "betas", betas)
        if len(times) != len(betas) or not times:
            raise ParameterError("schedule needs matching, nonempty knot arrays")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ParameterError("knot times must be strictly increasing")
        if any(not math.isfinite(b) for b in betas):
            raise ParameterError("anchoring weights must be finite")
        if any(nxt > cur + 1e-9 for cur, nxt in zip(betas, betas[1:])):
            raise ParameterError("anchoring weight must be non-increasing in time")

    def beta_at(self, t: float) -> float:
        return float(np.interp(t, np.array(self.times), np.array(self.betas)))

    def to_json(self) -> dict:
        return envelope(
            "beta_schedule",
            {"times": list(self.times), "betas": list(self.betas), "residual": self.residual},
        )

    @classmethod
    def from_json(cls, data) -> "BetaSchedule":
        data = check_envelope(data, "beta_schedule")
        return cls(
            times=tuple(data["times"]),
            betas=tuple(data["betas"]),
            residual=float(data.get("residual", 0.0)),
        )


@dataclass(frozen=True)
class AgentConfig:
    """Subjective world model plus the fixed non-anchoring parameters.

    Calibration sweeps only the anchoring weight; the data and prior
    weights and the response temperature stay as configured here.
    """

    prior: LabelPrior
    likelihood: FeatureLikelihoodTable
    ai: AiOutputTable
    alpha: float = 1.0
    gamma: float = 1.0
    temperature: float = 1.0
    tie_rule: str = "favor_ai"

    def profile(self, beta: float) -> BiasProfile:
        return BiasProfile(alpha=self.alpha, beta=beta, gamma=self.gamma, tie_rule=self.tie_rule)


def agreement_at_beta(
    config: AgentConfig, source: TrialSource, beta: float
) -> float:
    """Exact agreement of the configured agent at one anchoring weight."""
    return agreement_probability(
        config.profile(beta),
        config.prior,
        config.likelihood,
        config.ai,
        source,
        mode="exhaustive",
        temperature=config.temperature,
    ).value


def _isotonic_non_increasing(values: list[float]) -> list[float]:
    """Pool-adjacent-violators projection onto non-increasing sequences."""
    blocks = [[v, 1.0] for v in values]  # (mean, weight)
    merged: list[list[float]] = []
    for block in blocks:
        merged.append(block)
        while len(merged) >= 2 and merged[-2][0] < merged[-1][0]:
            m2, w2 = merged.pop()
            m1, w1 = merged.pop()
            merged.append([(m1 * w1 + m2 * w2) / (w1 + w2), w1 + w2])
    out: list[float] = []
    for mean, weight in merged:
        out.extend([mean] * int(round(weight)))
    return out


def calibrate_beta(
    target: AgreementCurve,
    config: AgentConfig,
    trial_source: TrialSource,
    knot_times: Optional[Sequence[float]] = None,
    side: str = "wrong",
    beta_range: tuple = (-8.0, 60.0),
    agreement_tolerance: float = 1e-5,
    max_iterations: int = 200,
) -> BetaSchedule:
    """Invert the target curve into an anchoring-weight schedule.

    ``trial_source`` must be the distribution matching ``side`` (e.g.
    trials whose shown prediction is wrong for the probe side).  The map
    beta -> agreement is strictly monotone under a diagonally dominant
    AI-output table, so each knot is solved by bisection; a final
    isotonic projection guards monotonicity of the schedule against
    tolerance-level wiggle.
    """
    if not config.ai.is_diagonally_dominant:
        raise CalibrationError(
            "calibration requires a diagonally dominant AI-output table "
            f"(violations: {config.ai.dominance_violations()})"
        )
    lo, hi = float(beta_range[0]), float(beta_range[1])
    if not lo < hi:
        raise ParameterError("beta_range must be an increasing pair")
    times = [float(t) for t in (knot_times if knot_times is not None else target.times)]
    agree_lo = agreement_at_beta(config, trial_source, lo)
    agree_hi = agreement_at_beta(config, trial_source, hi)

    raw: list[float] = []
    for t in times:
        goal = target.value(t, side)
        if goal < agree_lo - agreement_tolerance or goal > agree_hi + agreement_tolerance:
            raise CalibrationError(
                f"target agreement {goal:.4f} at t={t:g}s is outside the achievable "
                f"interval [{agree_lo:.4f}, {agree_hi:.4f}] over beta in "
                f"[{lo:g}, {hi:g}]",
                achievable=(agree_lo, agree_hi),
            )
        a, b = lo, hi
        beta = 0.5 * (a + b)
        for _ in range(max_iterations):
            beta = 0.5 * (a + b)
            value = agreement_at_beta(config, trial_source, beta)
            if abs(value - goal) <= agreement_tolerance:
                break
            if value < goal:
                a = beta
            else:
                b = beta
        raw.append(beta)

    projected = _isotonic_non_increasing(raw)
    residual = math.sqrt(
        sum(
            (agreement_at_beta(config, trial_source, b) - target.value(t, side)) ** 2
            for t, b in zip(times, projected)
        )
        / len(times)
    )
    return BetaSchedule(times=tuple(times), betas=tuple(projected), residual=residual)
