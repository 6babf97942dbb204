"""Biased Bayesian decisions from first principles.

A decision-maker weighs three evidence sources -- discrete features, a
shown AI prediction, and a class prior -- each raised to its own
exponent.  This script walks the presets, shows how the posterior ratio
moves, and measures agreement with the AI as the anchoring weight grows.
"""

import numpy as np

from anchortime import (
    AiOutputTable,
    BiasProfile,
    FeatureLikelihoodTable,
    LabelPrior,
    Observation,
    WorldSource,
    agreement_probability,
    decide,
    posterior_log_ratio,
)

prior = LabelPrior(0.5)
likelihood = FeatureLikelihoodTable({
    "symptom_a": {"absent": (0.7, 0.35), "present": (0.3, 0.65)},
    "symptom_b": {"absent": (0.6, 0.45), "present": (0.4, 0.55)},
})
ai = AiOutputTable.from_accuracy(0.85)

# Evidence mildly favors class 0, the AI says class 1.
observation = Observation({"symptom_a": "absent", "symptom_b": "absent"}, ai_prediction=1)

print("log posterior ratio (class 1 vs class 0) under each profile:")
profiles = {
    "rational": BiasProfile.rational(),
    "anchoring (beta=4)": BiasProfile.anchoring(beta=4.0),
    "confirmation (gamma=4)": BiasProfile.confirmation(gamma=4.0),
    "weak evidence (beta=-2)": BiasProfile.weak_evidence(beta=-2.0),
    "selective access (alpha=2)": BiasProfile.selective_accessibility(alpha=2.0),
}
for name, profile in profiles.items():
    ratio = posterior_log_ratio(profile, prior, likelihood, ai, observation)
    label = decide(ratio, profile.tie_rule, observation.ai_prediction).label
    print(f"  {name:<28} {ratio:+.4f}  -> decides {label}")

print("\nagreement with the shown prediction as anchoring strengthens:")
world = WorldSource(prior, likelihood, ai)
for beta in (0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 1e6):
    estimate = agreement_probability(
        BiasProfile(beta=beta), prior, likelihood, ai, world, mode="exhaustive"
    )
    print(f"  beta = {beta:>9g}   P(agree) = {estimate.value:.4f}")

print("\nweak-evidence profiles agree less than the rational baseline:")
rng = np.random.default_rng(0)
rational = agreement_probability(BiasProfile.rational(), prior, likelihood, ai, world).value
weak = agreement_probability(BiasProfile.weak_evidence(), prior, likelihood, ai, world).value
print(f"  rational {rational:.4f}   vs  weak-evidence {weak:.4f}")
