"""Logistic-regression assistant: training, feature ranking, advice.

Training is plain full-batch gradient descent on the L2-regularized
log loss (the intercept is not penalized).  The trained model carries
its encoder and train-split standardization statistics so advice can be
computed from raw records without the original dataset object.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .dataset import FeatureEncoder, PreparedDataset
from .errors import ParameterError, TrainingError
from .schema import check_envelope, envelope

# Features the published experiments retain for the assistant, used only
# for a soft consistency report when ranking on the full feature set.
EXPECTED_TOP10 = {
    "Medu", "Fedu", "Mjob", "Fjob", "studytime", "higher",
    "goout", "absences", "schoolsup", "failures",
}

# The complementary-knowledge trio withheld from the reduced assistant.
COMPLEMENTARY_FEATURES = ("studytime", "goout", "schoolsup")


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 0.5
    l2: float = 1e-3
    epochs: int = 5000
    tolerance: float = 1e-6

    def to_payload(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "l2": self.l2,
            "epochs": self.epochs,
            "tolerance": self.tolerance,
        }

    @classmethod
    def from_payload(cls, payload: Mapping) -> "TrainingConfig":
        return cls(
            learning_rate=float(payload["learning_rate"]),
            l2=float(payload["l2"]),
            epochs=int(payload["epochs"]),
            tolerance=float(payload["tolerance"]),
        )


@dataclass(frozen=True)
class AiAdvice:
    """What the participant is shown for one trial.

    ``prediction`` is the shown label: when ``flipped`` it is the
    negation of the model's argmax.  Confidence and its bin always
    derive from the unflipped model probability.
    """

    prediction: int
    confidence: float
    bin: str
    flipped: bool
    p_class1: float

    def __post_init__(self):
        if not (0.5 - 1e-12 <= self.confidence <= 1.0):
            raise ParameterError(f"confidence {self.confidence} outside [0.5, 1]")
        if self.bin not in ("C_L", "C_H"):
            raise ParameterError(f"bin must be C_L or C_H, got {self.bin!r}")


class LinearClassifier:
    """Standardized-feature logistic model with named weights."""

    def __init__(
        self,
        encoder: FeatureEncoder,
        columns: Sequence[str],
        column_feature: Sequence[str],
        weights: np.ndarray,
        intercept: float,
        means: np.ndarray,
        stds: np.ndarray,
        config: TrainingConfig,
        seed: int,
        converged: bool,
        gradient_norm: float,
        confidence_threshold: float = 0.75,
    ):
        if not np.all(np.isfinite(weights)) or not math.isfinite(intercept):
            raise TrainingError("non-finite weights after training")
        self.encoder = encoder
        self.columns = list(columns)
        self.column_feature = list(column_feature)
        self.weights = np.asarray(weights, dtype=float)
        self.intercept = float(intercept)
        self.means = np.asarray(means, dtype=float)
        self.stds = np.asarray(stds, dtype=float)
        self.config = config
        self.seed = seed
        self.converged = converged
        self.gradient_norm = gradient_norm
        self.confidence_threshold = confidence_threshold

    @property
    def features(self) -> list[str]:
        return self.encoder.features

    def _standardize_raw(self, raw: np.ndarray) -> np.ndarray:
        keep = [self.encoder.columns.index(c) for c in self.columns]
        return (raw[:, keep] - self.means) / self.stds

    def decision_scores(self, rows: Sequence[Mapping[str, object]]) -> np.ndarray:
        raw = self.encoder.encode(rows)
        return self._standardize_raw(raw) @ self.weights + self.intercept

    def predict_proba(self, rows: Sequence[Mapping[str, object]]) -> np.ndarray:
        scores = self.decision_scores(rows)
        return 1.0 / (1.0 + np.exp(-scores))

    def proba_standardized(self, X: np.ndarray) -> np.ndarray:
        return 1.0 / (1.0 + np.exp(-(X @ self.weights + self.intercept)))

    def accuracy_standardized(self, X: np.ndarray, y: np.ndarray) -> float:
        return float(((self.proba_standardized(X) >= 0.5).astype(int) == y).mean())

    def to_json(self) -> dict:
        weights_by_feature: dict[str, dict[str, float]] = {}
        for column, feature, weight in zip(self.columns, self.column_feature, self.weights):
            weights_by_feature.setdefault(feature, {})[column] = float(weight)
        return envelope(
            "linear_classifier",
            {
                "encoder": self.encoder.to_payload(),
                "weights": weights_by_feature,
                "intercept": self.intercept,
                "standardization": {
                    column: {"mean": float(m), "std": float(s)}
                    for column, m, s in zip(self.columns, self.means, self.stds)
                },
                "columns": self.columns,
                "confidence_threshold": self.confidence_threshold,
                "training": self.config.to_payload(),
                "seed": self.seed,
                "converged": self.converged,
                "gradient_norm": self.gradient_norm,
            },
        )

    @classmethod
    def from_json(cls, data: Mapping) -> "LinearClassifier":
        data = check_envelope(data, "linear_classifier")
        encoder = FeatureEncoder.from_payload(data["encoder"])
        columns = list(data["columns"])
        weights = []
        column_feature = []
        flat = {}
        for feature, per_column in data["weights"].items():
            for column, weight in per_column.items():
                flat[column] = (feature, weight)
        for column in columns:
            feature, weight = flat[column]
            column_feature.append(feature)
            weights.append(weight)
        std = data["standardization"]
        return cls(
            encoder=encoder,
            columns=columns,
            column_feature=column_feature,
            weights=np.array(weights),
            intercept=float(data["intercept"]),
            means=np.array([std[c]["mean"] for c in columns]),
            stds=np.array([std[c]["std"] for c in columns]),
            config=TrainingConfig.from_payload(data["training"]),
            seed=int(data["seed"]),
            converged=bool(data["converged"]),
            gradient_norm=float(data["gradient_norm"]),
            confidence_threshold=float(data.get("confidence_threshold", 0.75)),
        )


def train(
    dataset: PreparedDataset,
    config: Optional[TrainingConfig] = None,
    seed: int = 0,
) -> LinearClassifier:
    """Fit the logistic model on the training split.

    Stops when the gradient norm falls below the tolerance or the epoch
    cap is reached; ten consecutive loss increases abort with the loss
    trace attached.
    """
    config = config or TrainingConfig()
    X = dataset.X_train
    y = dataset.y_train.astype(float)
    if len(np.unique(y)) < 2:
        raise ParameterError("training split must contain both classes")
    n, p = X.shape
    rng = np.random.default_rng(seed)
    w = rng.normal(0.0, 0.01, size=p)
    b = 0.0

    def loss_of(w, b):
        z = X @ w + b
        # log(1 + exp(-z*y_pm)) with the stable formulation
        y_pm = 2.0 * y - 1.0
        m = -z * y_pm
        return float(np.mean(np.logaddexp(0.0, m)) + 0.5 * config.l2 * np.dot(w, w))

    trace = [loss_of(w, b)]
    increases = 0
    grad_norm = math.inf
    converged = False
    for _ in range(config.epochs):
        z = X @ w + b
        residual = 1.0 / (1.0 + np.exp(-z)) - y
        grad_w = X.T @ residual / n + config.l2 * w
        grad_b = float(residual.mean())
        grad_norm = float(np.sqrt(np.dot(grad_w, grad_w) + grad_b * grad_b))
        if grad_norm < config.tolerance:
            converged = True
            break
        w = w - config.learning_rate * grad_w
        b = b - config.learning_rate * grad_b
        current = loss_of(w, b)
        if current > trace[-1]:
            increases += 1
            if increases >= 10:
                raise TrainingError(
                    f"loss increased for {increases} consecutive epochs "
                    f"(learning rate {config.learning_rate} too high?)",
                    trace=trace + [current],
                )
        else:
            increases = 0
        trace.append(current)

    return LinearClassifier(
        encoder=dataset.encoder,
        columns=dataset.columns,
        column_feature=dataset.column_feature,
        weights=w,
        intercept=b,
        means=dataset.means,
        stds=dataset.stds,
        config=config,
        seed=seed,
        converged=converged,
        gradient_norm=grad_norm,
    )


def feature_importance(model: LinearClassifier) -> dict[str, float]:
    """Largest absolute standardized coefficient per original feature."""
    importance: dict[str, float] = {}
    for feature, weight in zip(model.column_feature, model.weights):
        importance[feature] = max(importance.get(feature, 0.0), abs(float(weight)))
    return importance


def rank_and_select_features(model: LinearClassifier, k: int = 10) -> list[str]:
    """Top-k original features by absolute standardized coefficient.

    For k = 10 on the full feature set the published retained list is
    expected; a mismatch is reported as a warning, never an error.
    """
    importance = feature_importance(model)
    if k > len(importance):
        raise ParameterError(
            f"k={k} exceeds the {len(importance)} available features"
        )
    ranked = sorted(importance, key=lambda f: (-importance[f], f))
    selected = ranked[:k]
    if k == 10:
        missing = EXPECTED_TOP10 - set(selected)
        if missing:
            warnings.warn(
                f"top-10 selection differs from the published list; missing {sorted(missing)}",
                stacklevel=2,
            )
    return selected


def reduced_feature_set(selected: Sequence[str]) -> list[str]:
    """Drop the complementary-knowledge trio from a retained list."""
    missing = [f for f in COMPLEMENTARY_FEATURES if f not in selected]
    if missing:
        raise ParameterError(
            f"cannot form the reduced set: {missing} not in the retained features"
        )
    return [f for f in selected if f not in COMPLEMENTARY_FEATURES]


def advise(
    model: LinearClassifier,
    observation: Mapping[str, object],
    confidence_threshold: Optional[float] = None,
    flip: bool = False,
) -> AiAdvice:
    """Prediction, confidence, and bin for one raw observation.

    ``flip`` negates only the shown label; confidence and bin always
    reflect the model's own probability.
    """
    threshold = model.confidence_threshold if confidence_threshold is None else confidence_threshold
    if not (0.5 <= threshold <= 1.0):
        raise ParameterError("confidence_threshold must lie in [0.5, 1]")
    p1 = float(model.predict_proba([observation])[0])
    label = int(p1 >= 0.5)
    confidence = max(p1, 1.0 - p1)
    shown = 1 - label if flip else label
    return AiAdvice(
        prediction=shown,
        confidence=confidence,
        bin="C_H" if confidence >= threshold else "C_L",
        flipped=flip,
        p_class1=p1,
    )
