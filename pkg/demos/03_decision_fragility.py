"""How likely is a noisy estimate to reverse a decision?"""
import numpy as np

from robustdecide.evaluation import PerturbationFamily, flip_rate, threshold_policy
from robustdecide.pipeline import (
    decision_margin_flip_probability,
    flip_probability_general_cdf,
    threshold_interval_overlap,
)

# Closed form for a Gaussian error on the margin.
for delta in (0.0, 0.01, 0.05, 0.2):
    print(f"delta={delta:<5} sigma=0.1  P(flip)={decision_margin_flip_probability(delta, 0.1):.4f}")

# %% Heavier tails flip more often at the same scale.
for spec in ("gaussian:1", "student_t:3:1", "student_t:1:1"):
    print(f"{spec:<14} P(flip at delta=2) = {flip_probability_general_cdf(2.0, spec):.4f}")

# %% Monte Carlo agrees with the closed form.
fam = PerturbationFamily("gaussian_noise", 0.1, draws=10_000, seed=1)
fr = flip_rate(threshold_policy(0.5), np.array([0.51]), fam, vectorized=True)
print(f"simulated {fr.rate:.4f} +/- {fr.std_error:.4f}; closed form {decision_margin_flip_probability(0.01, 0.1):.4f}")

# %% Interval-valued risk against an uncertain threshold.
for p, t in [((0.8, 0.9), (0.2, 0.3)), ((0.1, 0.4), (0.3, 0.5)), ((0.05, 0.1), 0.2)]:
    print(f"risk {p} vs threshold {t}: {threshold_interval_overlap(p, t)}")
