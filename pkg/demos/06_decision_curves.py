"""Net benefit across thresholds, and coverage of set-valued advice."""
import numpy as np

from robustdecide.evaluation import ClassifiedCohort, decision_curve, set_metrics

rng = np.random.default_rng(3)
y = (rng.random(1000) < 0.2).astype(int)
p = np.clip(0.2 + 0.45 * (y - 0.2) + 0.15 * rng.normal(size=1000), 0, 1)
cohort = ClassifiedCohort(p, y)
print(f"prevalence {cohort.prevalence:.3f}")
print("p*     model    all      none")
for pt in decision_curve(cohort, [0.05, 0.1, 0.2, 0.3, 0.5]):
    print(f"{pt.p_star:<6} {pt.model:+.4f} {pt.treat_all:+.4f} {pt.treat_none:+.4f}")

# %% Set-valued outputs trade coverage against size; abstentions count as misses.
records = [(("a",), "a"), (("a", "b"), "b"), (None, "a"), (("c",), "a")]
print(set_metrics(records))
