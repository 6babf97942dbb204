"""Train the assisting classifier on the student-performance data.

Generates the stand-in dataset files (identical schema and row counts
to the published distribution), trains the full model, retains the top
ten features, and builds the weaker seven-feature variant used when the
decision-maker holds complementary knowledge.
"""

from pathlib import Path

import numpy as np

from anchortime import advise, feature_importance
from anchortime.datagen import write_student_files
from anchortime.dataset import ingest, prepare
from anchortime.workflows import build_model_bundle

data_dir = Path("out/demo-data")
mat, por = write_student_files(data_dir)
records = ingest([mat, por])
print(f"ingested {len(records)} records "
      f"({sum(r.subject == 'math' for r in records)} math, "
      f"{sum(r.subject == 'portuguese' for r in records)} portuguese)")

bundle = build_model_bundle([mat, por])

print("\nretained features by importance:")
importance = feature_importance(bundle.model10)
for feature in sorted(bundle.selected_features, key=lambda f: -importance[f]):
    print(f"  {feature:<12} |coef| = {importance[feature]:.3f}")

for name, model, ds in (
    ("10-feature", bundle.model10, bundle.dataset10),
    ("7-feature", bundle.model7, bundle.dataset7),
):
    train_acc = model.accuracy_standardized(ds.X_train, ds.y_train)
    test_acc = model.accuracy_standardized(ds.X_test, ds.y_test)
    print(f"\n{name} assistant: train accuracy {train_acc:.3f}, test accuracy {test_acc:.3f}")

print("\nadvice for three test students (7-feature assistant):")
for record in bundle.dataset7.test_records()[:3]:
    a = advise(bundle.model7, record.values)
    print(f"  predicts {'pass' if a.prediction else 'fail'}"
          f"  confidence {a.confidence:.2f}  bin {a.bin}")

probabilities = bundle.model7.proba_standardized(bundle.dataset7.X_test)
confidence = np.maximum(probabilities, 1 - probabilities)
correct = (probabilities >= 0.5).astype(int) == bundle.dataset7.y_test
print(f"\nconfidence is informative: accuracy {correct[confidence >= 0.75].mean():.3f} "
      f"in C_H vs {correct[confidence < 0.75].mean():.3f} in C_L")
