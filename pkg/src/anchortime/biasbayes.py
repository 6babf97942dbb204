"""Biased Bayesian decisions over a binary label with AI assistance.

A decision-maker combines three evidence sources -- discrete features,
the shown AI prediction, and a class prior -- each raised to its own
exponent (``alpha``, ``beta``, ``gamma``).  Exponents of 1 recover the
rational Bayes posterior; other settings encode cognitive distortions
(anchoring, confirmation, weak-evidence, selective accessibility).

All arithmetic is carried out in the log domain: the posterior ratio is

    alpha * sum_j log(P(d_j|1)/P(d_j|0))
    + beta * log(q[yhat][1]/q[yhat][0])
    + gamma * log(p1/(1-p1))

which stays finite for any number of features and any real exponents,
including the negative ones used for weak-evidence and
selective-accessibility profiles.

Feature values are represented as strings throughout (discretization of
continuous features happens upstream).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence

import numpy as np

from .errors import (
    CapabilityError,
    EvidenceError,
    ModelError,
    ParameterError,
)
from .schema import envelope, check_envelope

TIE_TOLERANCE = 1e-12
PROB_SUM_TOLERANCE = 1e-12
TIE_RULES = ("favor_ai", "favor_class0", "coin_flip")

# Hard cap on the joint feature space for exhaustive enumeration.
MAX_ENUMERATION = 2 ** 20


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@dataclass(frozen=True)
class LabelPrior:
    """Prior probability of class 1.

    Strictly interior: log-domain computation requires nonzero mass on
    both classes.
    """

    p1: float

    def __post_init__(self):
        if not (0.0 < self.p1 < 1.0):
            raise ParameterError(f"prior p1 must lie strictly in (0, 1), got {self.p1}")

    @property
    def log_odds(self) -> float:
        return math.log(self.p1) - math.log(1.0 - self.p1)

    def to_payload(self) -> dict:
        return {"p1": self.p1}

    @classmethod
    def from_payload(cls, payload: Mapping) -> "LabelPrior":
        return cls(p1=float(payload["p1"]))


class FeatureLikelihoodTable:
    """Per-feature conditional value probabilities under each class.

    ``tables[feature][value] == (p_given_class0, p_given_class1)``.
    Within each feature and class the value probabilities sum to 1, and
    every stored probability is strictly positive (a pseudocount > 0 at
    fit time guarantees this; hand-built tables are validated).
    """

    def __init__(self, tables: Mapping[str, Mapping[str, tuple]], smoothing_pseudocount: float = 1.0):
        if smoothing_pseudocount < 0:
            raise ParameterError("smoothing_pseudocount must be nonnegative")
        self.smoothing_pseudocount = float(smoothing_pseudocount)
        self._tables: dict[str, dict[str, tuple[float, float]]] = {}
        for feature, values in tables.items():
            if not values:
                raise ModelError(f"feature {feature!r} has an empty value table")
            clean: dict[str, tuple[float, float]] = {}
            sums = [0.0, 0.0]
            for value, probs in values.items():
                if not isinstance(value, str):
                    raise ParameterError(
                        f"feature values must be strings; got {value!r} for feature {feature!r}"
                    )
                p0, p1 = float(probs[0]), float(probs[1])
                if p0 <= 0.0 or p1 <= 0.0:
                    raise ModelError(
                        f"zero/negative probability for {feature}={value}; "
                        "check the smoothing pseudocount"
                    )
                clean[value] = (p0, p1)
                sums[0] += p0
                sums[1] += p1
            for cls_idx, total in enumerate(sums):
                if abs(total - 1.0) > 1e-9:
                    raise ModelError(
                        f"value probabilities for feature {feature!r} under class "
                        f"{cls_idx} sum to {total!r}, expected 1"
                    )
            self._tables[feature] = clean

    @property
    def features(self) -> tuple[str, ...]:
        return tuple(self._tables)

    def values_of(self, feature: str) -> tuple[str, ...]:
        return tuple(self._tables[feature])

    def probabilities(self, feature: str, value: str) -> tuple[float, float]:
        try:
            per_value = self._tables[feature]
        except KeyError:
            raise EvidenceError(f"unknown feature {feature!r}") from None
        try:
            return per_value[value]
        except KeyError:
            raise EvidenceError(
                f"feature {feature!r} has no probability for value {value!r}"
            ) from None

    def log_ratio(self, feature: str, value: str) -> float:
        p0, p1 = self.probabilities(feature, value)
        return math.log(p1) - math.log(p0)

    @classmethod
    def fit(
        cls,
        rows: Sequence[Mapping[str, str]],
        labels: Sequence[int],
        features: Optional[Sequence[str]] = None,
        smoothing_pseudocount: float = 1.0,
        domains: Optional[Mapping[str, Sequence[str]]] = None,
    ) -> "FeatureLikelihoodTable":
        """Estimate value frequencies per class with Laplace smoothing.

        ``domains`` pins the value set per feature; otherwise the values
        observed in ``rows`` define it.
        """
        if smoothing_pseudocount <= 0:
            raise ParameterError("fitting requires smoothing_pseudocount > 0")
        if len(rows) != len(labels):
            raise ParameterError("rows and labels length mismatch")
        if not rows:
            raise ParameterError("cannot fit a likelihood table from no rows")
        if features is None:
            features = list(rows[0])
        counts: dict[str, dict[str, list[float]]] = {}
        for feature in features:
            if domains is not None and feature in domains:
                values = list(domains[feature])
            else:
                values = sorted({str(row[feature]) for row in rows})
            counts[feature] = {v: [smoothing_pseudocount, smoothing_pseudocount] for v in values}
        for row, label in zip(rows, labels):
            for feature in features:
                value = str(row[feature])
                if value not in counts[feature]:
                    raise EvidenceError(
                        f"value {value!r} of feature {feature!r} is outside its declared domain"
                    )
                counts[feature][value][int(label)] += 1.0
        tables = {}
        for feature, per_value in counts.items():
            totals = [sum(c[0] for c in per_value.values()), sum(c[1] for c in per_value.values())]
            tables[feature] = {
                v: (c[0] / totals[0], c[1] / totals[1]) for v, c in per_value.items()
            }
        return cls(tables, smoothing_pseudocount=smoothing_pseudocount)

    def to_payload(self) -> dict:
        return {
            "smoothing_pseudocount": self.smoothing_pseudocount,
            "tables": {
                feature: {value: [p0, p1] for value, (p0, p1) in per_value.items()}
                for feature, per_value in self._tables.items()
            },
        }

    @classmethod
    def from_payload(cls, payload: Mapping) -> "FeatureLikelihoodTable":
        return cls(
            {
                feature: {value: tuple(probs) for value, probs in per_value.items()}
                for feature, per_value in payload["tables"].items()
            },
            smoothing_pseudocount=float(payload.get("smoothing_pseudocount", 1.0)),
        )


class AiOutputTable:
    """2x2 conditional table ``q[yhat][y] = P(shown prediction | label)``.

    Columns (fixed label) sum to 1 and every entry is positive.  The
    positive-correlation property -- each row is largest on the diagonal
    -- is checked and reported, not enforced: callers that need it (the
    agreement-monotonicity argument, the calibration bisection) assert
    ``is_diagonally_dominant`` themselves.
    """

    def __init__(self, q: Sequence[Sequence[float]]):
        q = [[float(q[0][0]), float(q[0][1])], [float(q[1][0]), float(q[1][1])]]
        for yhat in range(2):
            for y in range(2):
                if q[yhat][y] <= 0.0:
                    raise ModelError(f"AI-output table entry q[{yhat}][{y}] must be positive")
        for y in range(2):
            total = q[0][y] + q[1][y]
            if abs(total - 1.0) > 1e-9:
                raise ModelError(
                    f"AI-output column for label {y} sums to {total!r}, expected 1"
                )
        self._q = q

    @classmethod
    def from_accuracy(cls, accuracy: float) -> "AiOutputTable":
        """Symmetric table with ``q[y][y] = accuracy`` for both labels.

        Used both for the accuracy announced to participants (the
        induced belief) and for a model's measured accuracy.
        """
        if not (0.0 < accuracy < 1.0):
            raise ParameterError("accuracy must lie strictly in (0, 1)")
        return cls([[accuracy, 1.0 - accuracy], [1.0 - accuracy, accuracy]])

    def __getitem__(self, yhat: int) -> Sequence[float]:
        return tuple(self._q[yhat])

    @property
    def is_diagonally_dominant(self) -> bool:
        return self._q[0][0] > self._q[0][1] and self._q[1][1] > self._q[1][0]

    def dominance_violations(self) -> list[str]:
        out = []
        if self._q[0][0] <= self._q[0][1]:
            out.append("q[0][0] <= q[0][1]")
        if self._q[1][1] <= self._q[1][0]:
            out.append("q[1][1] <= q[1][0]")
        return out

    def log_ratio(self, yhat: int) -> float:
        """log of q[yhat][1] / q[yhat][0]."""
        return math.log(self._q[yhat][1]) - math.log(self._q[yhat][0])

    def swapped(self) -> "AiOutputTable":
        """Table after relabeling classes 0 <-> 1 on both axes."""
        q = self._q
        return AiOutputTable([[q[1][1], q[1][0]], [q[0][1], q[0][0]]])

    def to_payload(self) -> dict:
        return {"q": [list(self._q[0]), list(self._q[1])]}

    @classmethod
    def from_payload(cls, payload: Mapping) -> "AiOutputTable":
        return cls(payload["q"])


@dataclass(frozen=True)
class BiasProfile:
    """Exponents applied to the three evidence factors, plus a tie rule.

    ``alpha`` weights the feature evidence, ``beta`` the AI output,
    ``gamma`` the prior.  ``tie_rule`` resolves log-ratios within the
    tie band; ``coin_flip`` draws from ``tie_seed``.
    """

    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    tie_rule: str = "favor_ai"
    tie_seed: Optional[int] = None

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"exponent {name} must be finite, got {value}")
        if self.tie_rule not in TIE_RULES:
            raise ParameterError(f"tie_rule must be one of {TIE_RULES}, got {self.tie_rule!r}")

    @classmethod
    def rational(cls, **kwargs) -> "BiasProfile":
        return cls(alpha=1.0, beta=1.0, gamma=1.0, **kwargs)

    @classmethod
    def anchoring(cls, beta: float = 4.0, **kwargs) -> "BiasProfile":
        if beta <= 1.0:
            raise ParameterError("anchoring requires beta > 1")
        return cls(beta=beta, **kwargs)

    @classmethod
    def confirmation(cls, gamma: float = 4.0, **kwargs) -> "BiasProfile":
        if gamma <= 1.0:
            raise ParameterError("confirmation requires gamma > 1")
        return cls(gamma=gamma, **kwargs)

    @classmethod
    def weak_evidence(cls, beta: float = -2.0, **kwargs) -> "BiasProfile":
        if beta >= -1.0:
            raise ParameterError("weak evidence requires beta < -1")
        return cls(beta=beta, **kwargs)

    @classmethod
    def selective_accessibility(cls, alpha: float = 2.0, **kwargs) -> "BiasProfile":
        if not (alpha > 1.0 or alpha < -1.0):
            raise ParameterError("selective accessibility requires alpha > 1 or alpha < -1")
        return cls(alpha=alpha, **kwargs)

    def with_beta(self, beta: float) -> "BiasProfile":
        return BiasProfile(self.alpha, beta, self.gamma, self.tie_rule, self.tie_seed)

    def to_payload(self) -> dict:
        payload = {
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "tie_rule": self.tie_rule,
        }
        if self.tie_seed is not None:
            payload["tie_seed"] = self.tie_seed
        return payload

    @classmethod
    def from_payload(cls, payload: Mapping) -> "BiasProfile":
        return cls(
            alpha=float(payload.get("alpha", 1.0)),
            beta=float(payload.get("beta", 1.0)),
            gamma=float(payload.get("gamma", 1.0)),
            tie_rule=payload.get("tie_rule", "favor_ai"),
            tie_seed=payload.get("tie_seed"),
        )

    def to_json(self) -> dict:
        return envelope("bias_profile", self.to_payload())

    @classmethod
    def from_json(cls, data: Mapping) -> "BiasProfile":
        return cls.from_payload(check_envelope(data, "bias_profile"))


@dataclass(frozen=True)
class Observation:
    """Feature values plus the AI prediction the decision-maker sees."""

    features: Mapping[str, str]
    ai_prediction: int

    def __post_init__(self):
        if self.ai_prediction not in (0, 1):
            raise ParameterError("ai_prediction must be 0 or 1")


@dataclass(frozen=True)
class Decision:
    """Sign of the log posterior ratio, with the tie band made explicit."""

    log_ratio: float
    label: int
    was_tie: bool = False


def evidence_terms(
    prior: LabelPrior,
    likelihood: FeatureLikelihoodTable,
    ai: AiOutputTable,
    observation: Observation,
) -> tuple[float, float, float]:
    """Unweighted log-ratio contributions (data, AI output, prior).

    ``posterior_log_ratio`` is the dot product of these terms with
    (alpha, beta, gamma); exposing them separately lets callers sweep
    exponents without re-walking the tables.
    """
    data_term = 0.0
    for feature, value in observation.features.items():
        data_term += likelihood.log_ratio(feature, value)
    ai_term = ai.log_ratio(observation.ai_prediction)
    return data_term, ai_term, prior.log_odds


def posterior_log_ratio(
    profile: BiasProfile,
    prior: LabelPrior,
    likelihood: FeatureLikelihoodTable,
    ai: AiOutputTable,
    observation: Observation,
) -> float:
    """Log of the biased posterior ratio P(label 1 | .) / P(label 0 | .)."""
    data_term, ai_term, prior_term = evidence_terms(prior, likelihood, ai, observation)
    value = profile.alpha * data_term + profile.beta * ai_term + profile.gamma * prior_term
    if not math.isfinite(value):
        raise ModelError(f"non-finite log ratio {value!r}")
    return value


def decide(
    log_ratio: float,
    tie_rule: str = "favor_ai",
    ai_prediction: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> Decision:
    """Threshold the log ratio at zero; the tie band defers to the rule."""
    if not math.isfinite(log_ratio):
        raise ParameterError(f"log_ratio must be finite, got {log_ratio}")
    if abs(log_ratio) <= TIE_TOLERANCE:
        if tie_rule == "favor_ai":
            if ai_prediction is None:
                raise ParameterError("tie_rule favor_ai needs the AI prediction")
            label = int(ai_prediction)
        elif tie_rule == "favor_class0":
            label = 0
        elif tie_rule == "coin_flip":
            if rng is None:
                raise ParameterError("tie_rule coin_flip needs a seeded generator")
            label = int(rng.integers(0, 2))
        else:
            raise ParameterError(f"unknown tie_rule {tie_rule!r}")
        return Decision(log_ratio=log_ratio, label=label, was_tie=True)
    return Decision(log_ratio=log_ratio, label=int(log_ratio > 0.0), was_tie=False)


def simulate_decision(
    profile: BiasProfile,
    prior: LabelPrior,
    likelihood: FeatureLikelihoodTable,
    ai: AiOutputTable,
    observation: Observation,
    temperature: float = 0.0,
    rng: Optional[np.random.Generator] = None,
    seed: Optional[int] = None,
) -> Decision:
    """Stochastic wrapper around :func:`decide`.

    With temperature ``tau > 0`` the label is drawn with
    ``P(label 1) = sigmoid(log_ratio / tau)``; ``tau = 0`` recovers the
    deterministic decision exactly.
    """
    if temperature < 0:
        raise ParameterError(f"temperature must be nonnegative, got {temperature}")
    log_ratio = posterior_log_ratio(profile, prior, likelihood, ai, observation)
    if temperature == 0.0:
        if rng is None and profile.tie_rule == "coin_flip":
            rng = np.random.default_rng(profile.tie_seed if seed is None else seed)
        return decide(log_ratio, profile.tie_rule, observation.ai_prediction, rng)
    if rng is None:
        rng = np.random.default_rng(seed)
    p1 = _sigmoid(log_ratio / temperature)
    label = int(rng.random() < p1)
    return Decision(log_ratio=log_ratio, label=label, was_tie=False)


# ---------------------------------------------------------------------------
# Trial sources
# ---------------------------------------------------------------------------


class TrialSource:
    """Distribution over observations.

    Exhaustive mode needs ``enumerate_weighted`` (pairs of observation
    and probability summing to 1); Monte Carlo mode needs ``sample``.
    """

    def enumeration_size(self) -> Optional[int]:
        return None

    def enumerate_weighted(self) -> Iterator[tuple[Observation, float]]:
        raise CapabilityError(f"{type(self).__name__} is not enumerable")

    def sample(self, rng: np.random.Generator) -> Observation:
        raise CapabilityError(f"{type(self).__name__} is not sampleable")


class EmpiricalSource(TrialSource):
    """Uniform (or weighted) distribution over a fixed observation list."""

    def __init__(self, observations: Sequence[Observation], weights: Optional[Sequence[float]] = None):
        if not observations:
            raise ParameterError("EmpiricalSource needs at least one observation")
        self.observations = list(observations)
        if weights is None:
            weights = [1.0 / len(observations)] * len(observations)
        total = float(sum(weights))
        if total <= 0:
            raise ParameterError("weights must have positive total")
        self.weights = [float(w) / total for w in weights]

    def enumeration_size(self) -> int:
        return len(self.observations)

    def enumerate_weighted(self) -> Iterator[tuple[Observation, float]]:
        return iter(zip(self.observations, self.weights))

    def sample(self, rng: np.random.Generator) -> Observation:
        idx = rng.choice(len(self.observations), p=self.weights)
        return self.observations[int(idx)]


class WorldSource(TrialSource):
    """Generative world consistent with a subjective model.

    The true label is drawn from ``prior``, feature values independently
    from ``likelihood`` given the label, and the shown prediction from
    ``ai`` given the label.  ``condition`` restricts to trials where the
    shown prediction is right or wrong (renormalized), which is how the
    probe-trial and unmodified-trial populations are expressed.
    """

    def __init__(
        self,
        prior: LabelPrior,
        likelihood: FeatureLikelihoodTable,
        ai: AiOutputTable,
        condition: Optional[str] = None,
    ):
        if condition not in (None, "ai_correct", "ai_wrong"):
            raise ParameterError("condition must be None, 'ai_correct' or 'ai_wrong'")
        self.prior = prior
        self.likelihood = likelihood
        self.ai = ai
        self.condition = condition

    def _admissible(self, yhat: int, y: int) -> bool:
        if self.condition == "ai_correct":
            return yhat == y
        if self.condition == "ai_wrong":
            return yhat != y
        return True

    def enumeration_size(self) -> int:
        size = 2  # shown prediction
        for feature in self.likelihood.features:
            size *= len(self.likelihood.values_of(feature))
            if size > MAX_ENUMERATION:
                raise CapabilityError(
                    f"joint feature space exceeds the enumeration cap of {MAX_ENUMERATION}"
                )
        return size

    def enumerate_weighted(self) -> Iterator[tuple[Observation, float]]:
        self.enumeration_size()
        features = self.likelihood.features
        domains = [self.likelihood.values_of(f) for f in features]
        prior_by_label = (1.0 - self.prior.p1, self.prior.p1)
        entries: list[tuple[Observation, float]] = []
        total = 0.0
        for combo in itertools.product(*domains):
            per_label = []
            for y in (0, 1):
                w = prior_by_label[y]
                for feature, value in zip(features, combo):
                    w *= self.likelihood.probabilities(feature, value)[y]
                per_label.append(w)
            for yhat in (0, 1):
                weight = 0.0
                for y in (0, 1):
                    if self._admissible(yhat, y):
                        weight += per_label[y] * self.ai[yhat][y]
                if weight > 0.0:
                    obs = Observation(dict(zip(features, combo)), yhat)
                    entries.append((obs, weight))
                    total += weight
        for obs, weight in entries:
            yield obs, weight / total

    def sample(self, rng: np.random.Generator) -> Observation:
        while True:
            y = int(rng.random() < self.prior.p1)
            yhat = int(rng.random() < self.ai[1][y])
            if not self._admissible(yhat, y):
                continue
            features = {}
            for feature in self.likelihood.features:
                values = self.likelihood.values_of(feature)
                probs = [self.likelihood.probabilities(feature, v)[y] for v in values]
                idx = rng.choice(len(values), p=probs)
                features[feature] = values[int(idx)]
            return Observation(features, yhat)


@dataclass(frozen=True)
class AgreementEstimate:
    """P(decision == shown prediction) with its uncertainty."""

    value: float
    standard_error: float
    mode: str
    n: int

    def __float__(self):
        return self.value


def _agreement_given_observation(
    profile: BiasProfile,
    prior: LabelPrior,
    likelihood: FeatureLikelihoodTable,
    ai: AiOutputTable,
    observation: Observation,
    temperature: float,
) -> float:
    log_ratio = posterior_log_ratio(profile, prior, likelihood, ai, observation)
    yhat = observation.ai_prediction
    if temperature > 0.0:
        p1 = _sigmoid(log_ratio / temperature)
        return p1 if yhat == 1 else 1.0 - p1
    if abs(log_ratio) <= TIE_TOLERANCE:
        if profile.tie_rule == "favor_ai":
            return 1.0
        if profile.tie_rule == "favor_class0":
            return 1.0 if yhat == 0 else 0.0
        return 0.5  # coin flip
    return 1.0 if (log_ratio > 0.0) == (yhat == 1) else 0.0


def agreement_probability(
    profile: BiasProfile,
    prior: LabelPrior,
    likelihood: FeatureLikelihoodTable,
    ai: AiOutputTable,
    trial_source: TrialSource,
    mode: str = "auto",
    temperature: float = 0.0,
    samples: int = 100_000,
    seed: Optional[int] = None,
) -> AgreementEstimate:
    """Probability that the decision matches the shown prediction.

    Exhaustive mode is exact (standard error 0); Monte Carlo mode draws
    ``samples`` seeded trials and reports the binomial standard error.
    ``temperature`` matches :func:`simulate_decision`.
    """
    if temperature < 0:
        raise ParameterError("temperature must be nonnegative")
    if mode not in ("auto", "exhaustive", "monte_carlo"):
        raise ParameterError(f"unknown mode {mode!r}")
    if mode == "auto":
        try:
            trial_source.enumeration_size()
            mode = "exhaustive"
        except CapabilityError:
            mode = "monte_carlo"
    if mode == "exhaustive":
        # Dividing by the accumulated weight keeps the all-agree case at
        # exactly 1.0 despite float round-off in the weights.
        agree_sum = 0.0
        weight_sum = 0.0
        n = 0
        for observation, weight in trial_source.enumerate_weighted():
            agree_sum += weight * _agreement_given_observation(
                profile, prior, likelihood, ai, observation, temperature
            )
            weight_sum += weight
            n += 1
        return AgreementEstimate(
            value=agree_sum / weight_sum, standard_error=0.0, mode="exhaustive", n=n
        )
    rng = np.random.default_rng(seed)
    agree = 0
    for _ in range(samples):
        observation = trial_source.sample(rng)
        decision = simulate_decision(
            profile, prior, likelihood, ai, observation, temperature=temperature, rng=rng
        )
        agree += int(decision.label == observation.ai_prediction)
    p = agree / samples
    se = math.sqrt(max(p * (1.0 - p), 1e-12) / samples)
    return AgreementEstimate(value=p, standard_error=se, mode="monte_carlo", n=samples)


# ---------------------------------------------------------------------------
# Serialization of the full subjective model
# ---------------------------------------------------------------------------


def model_to_json(
    prior: LabelPrior, likelihood: FeatureLikelihoodTable, ai: AiOutputTable
) -> dict:
    return envelope(
        "subjective_model",
        {
            "prior": prior.to_payload(),
            "likelihood": likelihood.to_payload(),
            "ai_output": ai.to_payload(),
        },
    )


def model_from_json(data: Mapping) -> tuple[LabelPrior, FeatureLikelihoodTable, AiOutputTable]:
    data = check_envelope(data, "subjective_model")
    return (
        LabelPrior.from_payload(data["prior"]),
        FeatureLikelihoodTable.from_payload(data["likelihood"]),
        AiOutputTable.from_payload(data["ai_output"]),
    )
