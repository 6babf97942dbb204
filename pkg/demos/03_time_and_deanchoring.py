"""From the timed experiment's curves to an anchoring-weight schedule.

The first experiment measured how agreement with a wrong prediction
falls as more seconds are allocated.  Calibration inverts that curve
through the biased-Bayes agent: each knot time gets the anchoring
weight that reproduces the observed agreement on probe-style trials.
"""

from anchortime import (
    calibrate_beta,
    default_experiment1_curve,
    fitted_slope,
)
from anchortime.harness import probe_source
from anchortime.workflows import build_model_bundle, resolve_data_paths
from anchortime.harness import build_experiment1_plan

curve = default_experiment1_curve()
print("probe-side agreement curve (shown prediction wrong):")
for t in (10, 15, 17.5, 20, 25):
    print(f"  t = {t:>5} s   agree {curve.when_wrong(t):.3f}   "
          f"disagree {1 - curve.when_wrong(t):.3f}")
print(f"fitted disagreement-vs-time slope: {fitted_slope(curve):.5f} per second")

paths = resolve_data_paths("out/demo-data")
bundle = build_model_bundle(paths)
plan = build_experiment1_plan(
    bundle.model10, bundle.dataset10.test_records(), list(bundle.dataset10.y_test),
    bundle.selected_features, seed=5,
)
schedule = calibrate_beta(
    curve, bundle.agent, probe_source(plan), knot_times=(10, 15, 20, 25)
)
print("\ncalibrated anchoring-weight schedule (monotone in time):")
for t, b in zip(schedule.times, schedule.betas):
    print(f"  t = {t:>4g} s   beta = {b:+.3f}")
print(f"residual (rms agreement gap at the knots): {schedule.residual:.2e}")
