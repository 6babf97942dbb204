"""Student-performance data: file ingest, encoding, split, standardization.

Files are semicolon-delimited UTF-8 text with a header row and quoted
strings (the UCI distribution format).  Two subject files (mathematics
and portuguese) pool into one dataset; records are never deduplicated.

The first two period grades are excluded from the feature set: the task
models prediction from background attributes, and the final grade G3 is
consumed only by the pass/fail label rule.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import (
    EmptyInputError,
    ParameterError,
    ParseError,
    UnknownColumnError,
)

SUBJECT_MATH = "math"
SUBJECT_PORTUGUESE = "portuguese"

COLUMNS = [
    "school", "sex", "age", "address", "famsize", "Pstatus",
    "Medu", "Fedu", "Mjob", "Fjob", "reason", "guardian",
    "traveltime", "studytime", "failures", "schoolsup", "famsup", "paid",
    "activities", "nursery", "higher", "internet", "romantic",
    "famrel", "freetime", "goout", "Dalc", "Walc", "health", "absences",
    "G1", "G2", "G3",
]

INT_COLUMNS = {
    "age", "Medu", "Fedu", "traveltime", "studytime", "failures",
    "famrel", "freetime", "goout", "Dalc", "Walc", "health", "absences",
    "G1", "G2", "G3",
}

GRADE_COLUMNS = ("G1", "G2", "G3")

# Everything except the grades is available as a model feature.
MODEL_FEATURES = [c for c in COLUMNS if c not in GRADE_COLUMNS]

# Nominal features get one-hot columns; two-level ones a single indicator.
BINARY_LEVELS = {
    "school": ("GP", "MS"),
    "sex": ("F", "M"),
    "address": ("U", "R"),
    "famsize": ("LE3", "GT3"),
    "Pstatus": ("T", "A"),
    "schoolsup": ("no", "yes"),
    "famsup": ("no", "yes"),
    "paid": ("no", "yes"),
    "activities": ("no", "yes"),
    "nursery": ("no", "yes"),
    "higher": ("no", "yes"),
    "internet": ("no", "yes"),
    "romantic": ("no", "yes"),
}

NOMINAL_LEVELS = {
    "Mjob": ("at_home", "health", "other", "services", "teacher"),
    "Fjob": ("at_home", "health", "other", "services", "teacher"),
    "reason": ("course", "home", "other", "reputation"),
    "guardian": ("father", "mother", "other"),
}


@dataclass(frozen=True)
class RawStudentRecord:
    """One parsed row: the 33 schema attributes plus a subject tag."""

    subject: str
    values: Mapping[str, object]

    def __getitem__(self, column: str):
        return self.values[column]

    @property
    def final_grade(self) -> int:
        return int(self.values["G3"])


def _infer_subject(path: Path) -> str:
    name = path.name.lower()
    if "por" in name:
        return SUBJECT_PORTUGUESE
    if "mat" in name:
        return SUBJECT_MATH
    return path.stem


def ingest(
    paths,
    subject_filter: Optional[str] = None,
) -> list[RawStudentRecord]:
    """Parse one or more subject files into raw records.

    Raises :class:`UnknownColumnError` on a header mismatch,
    :class:`ParseError` (naming row and column) on a bad cell, and
    :class:`EmptyInputError` when no data rows survive.
    """
    if isinstance(paths, (str, Path)):
        paths = [paths]
    records: list[RawStudentRecord] = []
    for raw_path in paths:
        path = Path(raw_path)
        subject = _infer_subject(path)
        if subject_filter is not None and subject != subject_filter:
            continue
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh, delimiter=";", quotechar='"')
            try:
                header = next(reader)
            except StopIteration:
                raise EmptyInputError(f"{path} is empty") from None
            missing = [c for c in COLUMNS if c not in header]
            extra = [c for c in header if c not in COLUMNS]
            if missing or extra:
                raise UnknownColumnError(
                    f"{path}: header mismatch (missing {missing or 'none'}, "
                    f"unexpected {extra or 'none'})"
                )
            index = {c: header.index(c) for c in COLUMNS}
            for row_number, row in enumerate(reader, start=2):
                if not row or all(not cell.strip() for cell in row):
                    continue
                values: dict[str, object] = {}
                for column in COLUMNS:
                    cell = row[index[column]].strip()
                    if column in INT_COLUMNS:
                        try:
                            parsed: object = int(cell)
                        except ValueError:
                            raise ParseError(
                                f"{path} row {row_number}, column {column!r}: "
                                f"cannot parse {cell!r} as an integer"
                            ) from None
                    else:
                        parsed = cell
                    values[column] = parsed
                grade = values["G3"]
                if not (0 <= int(grade) <= 20):
                    raise ParseError(
                        f"{path} row {row_number}, column 'G3': {grade} outside [0, 20]"
                    )
                records.append(RawStudentRecord(subject=subject, values=values))
    if not records:
        raise EmptyInputError("no records ingested")
    return records


class FeatureEncoder:
    """Maps raw feature values to the numeric design-matrix layout.

    Numeric features pass through as one column; two-level categoricals
    become one indicator; nominal features expand to one column per
    level.  The layout is part of a trained model's serialized state so
    advice can be computed from raw records alone.
    """

    def __init__(self, features: Sequence[str]):
        unknown = [f for f in features if f not in MODEL_FEATURES]
        if unknown:
            raise ParameterError(f"unknown model features: {unknown}")
        self.features = list(features)
        self.columns: list[str] = []
        self.column_feature: list[str] = []
        self._spec: list[tuple[str, str, tuple]] = []
        for feature in self.features:
            if feature in INT_COLUMNS:
                self._spec.append((feature, "numeric", ()))
                self.columns.append(feature)
                self.column_feature.append(feature)
            elif feature in BINARY_LEVELS:
                levels = BINARY_LEVELS[feature]
                self._spec.append((feature, "binary", levels))
                self.columns.append(f"{feature}={levels[1]}")
                self.column_feature.append(feature)
            else:
                levels = NOMINAL_LEVELS[feature]
                self._spec.append((feature, "onehot", levels))
                for level in levels:
                    self.columns.append(f"{feature}={level}")
                    self.column_feature.append(feature)

    def encode(self, rows: Iterable[Mapping[str, object]]) -> np.ndarray:
        rows = list(rows)
        out = np.zeros((len(rows), len(self.columns)), dtype=float)
        for i, row in enumerate(rows):
            j = 0
            for feature, kind, levels in self._spec:
                value = row[feature]
                if kind == "numeric":
                    out[i, j] = float(value)
                    j += 1
                elif kind == "binary":
                    if value not in levels:
                        raise ParseError(
                            f"feature {feature!r}: unexpected value {value!r}"
                        )
                    out[i, j] = float(value == levels[1])
                    j += 1
                else:
                    if value not in levels:
                        raise ParseError(
                            f"feature {feature!r}: unexpected value {value!r}"
                        )
                    out[i, j + levels.index(value)] = 1.0
                    j += len(levels)
        return out

    def to_payload(self) -> dict:
        return {"features": self.features}

    @classmethod
    def from_payload(cls, payload: Mapping) -> "FeatureEncoder":
        return cls(payload["features"])


@dataclass
class PreparedDataset:
    """Encoded, split, train-standardized design matrix with labels.

    Standardization statistics come from the training split only and
    are applied to both splits; columns with zero training variance are
    dropped with a warning entry.
    """

    records: list[RawStudentRecord]
    encoder: FeatureEncoder
    X: np.ndarray
    y: np.ndarray
    train_idx: np.ndarray
    test_idx: np.ndarray
    columns: list[str]
    column_feature: list[str]
    means: np.ndarray
    stds: np.ndarray
    pass_threshold: int
    split_seed: int
    train_fraction: float
    warnings: list[str] = field(default_factory=list)

    @property
    def X_train(self) -> np.ndarray:
        return self.X[self.train_idx]

    @property
    def y_train(self) -> np.ndarray:
        return self.y[self.train_idx]

    @property
    def X_test(self) -> np.ndarray:
        return self.X[self.test_idx]

    @property
    def y_test(self) -> np.ndarray:
        return self.y[self.test_idx]

    def train_records(self) -> list[RawStudentRecord]:
        return [self.records[i] for i in self.train_idx]

    def test_records(self) -> list[RawStudentRecord]:
        return [self.records[i] for i in self.test_idx]


def prepare(
    records: Sequence[RawStudentRecord],
    pass_threshold: int = 10,
    split_seed: int = 0,
    train_fraction: float = 0.7,
    features: Optional[Sequence[str]] = None,
) -> PreparedDataset:
    """Label, split, encode, and standardize raw records.

    The label is 1 iff the final grade reaches ``pass_threshold``.  The
    split is a seeded permutation with ``round(train_fraction * N)``
    training rows.
    """
    if not records:
        raise ParameterError("prepare needs at least one record")
    if not (0.0 < train_fraction < 1.0):
        raise ParameterError("train_fraction must lie in (0, 1)")
    encoder = FeatureEncoder(features if features is not None else MODEL_FEATURES)
    raw = encoder.encode([r.values for r in records])
    y = np.array([int(r.final_grade >= pass_threshold) for r in records], dtype=int)

    rng = np.random.default_rng(split_seed)
    order = rng.permutation(len(records))
    n_train = int(round(train_fraction * len(records)))
    train_idx = np.sort(order[:n_train])
    test_idx = np.sort(order[n_train:])

    means = raw[train_idx].mean(axis=0)
    stds = raw[train_idx].std(axis=0)
    keep = stds > 0.0
    warnings: list[str] = []
    for col, kept in zip(encoder.columns, keep):
        if not kept:
            warnings.append(f"dropped column {col!r}: zero variance on the training split")
    columns = [c for c, k in zip(encoder.columns, keep) if k]
    column_feature = [f for f, k in zip(encoder.column_feature, keep) if k]
    X = (raw[:, keep] - means[keep]) / stds[keep]

    return PreparedDataset(
        records=list(records),
        encoder=encoder,
        X=X,
        y=y,
        train_idx=train_idx,
        test_idx=test_idx,
        columns=columns,
        column_feature=column_feature,
        means=means[keep],
        stds=stds[keep],
        pass_threshold=pass_threshold,
        split_seed=split_seed,
        train_fraction=train_fraction,
        warnings=warnings,
    )
