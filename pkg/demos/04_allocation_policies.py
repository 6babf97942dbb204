"""Budgeted time allocation over binary-confidence trials.

Builds the per-bin reward curves from an agreement curve whose
right-side agreement also falls with time (the premise the optimal
policy needs), solves the two-level allocation, and compares it against
the constant and random baselines analytically and by simulation.
"""

from anchortime import (
    ConfidenceSplit,
    RewardCurves,
    TimeBudget,
    assumption_demo_curve,
    check_assumption1,
    compare_policies,
    confidence_policy,
    grid_search_two_level,
    simulate_team_reward,
    solve_confidence_allocation,
)

budget = TimeBudget(total_time=17.5 * 40, trials=40, t_min=10.0)
split = ConfidenceSplit(p_low=0.5)
t_low, t_high = solve_confidence_allocation(budget, split.p_low)
print(f"budget: {budget.per_trial:g}s per trial average, floor {budget.t_min:g}s")
print(f"solved allocation: {t_low:g}s on low confidence, {t_high:g}s on high confidence")

curve = assumption_demo_curve()
grid = (10.0, 12.5, 15.0, 17.5, 20.0, 22.5, 25.0)
curves = RewardCurves.from_agreement(curve, ai_accuracy_low=0.45, ai_accuracy_high=0.75, grid=grid)
report = check_assumption1(curves)
print(f"\nmonotonicity premise holds on the grid: {report.holds}")
print("  reward vs seconds  low bin:", [round(float(v), 3) for v in curves.low])
print("                    high bin:", [round(float(v), 3) for v in curves.high])

comparison = compare_policies(split, curves, budget)
print("\nanalytic per-trial reward:")
for name in comparison.ranking:
    print(f"  {name:<18} {comparison.rewards[name]:.4f}")
print(f"confidence-based dominates both baselines: {comparison.confidence_dominates}")

best = grid_search_two_level(split, curves, budget, resolution=0.5)
print(f"\nexhaustive two-level search agrees: best ({best[0]:g}s, {best[1]:g}s) "
      f"-> {best[2]:.4f}")

policy = confidence_policy(budget, split.p_low)
estimate, se = simulate_team_reward(policy, split, curves, trials=200_000, seed=1)
print(f"Monte Carlo check of the confidence policy: {estimate:.4f} "
      f"(+/- {3 * se:.4f}) vs analytic {comparison.rewards['confidence_based']:.4f}")
