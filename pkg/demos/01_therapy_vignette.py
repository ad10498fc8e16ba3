"""Therapy selection: score-first versus ordinal-first.

Run with ``python demos/01_therapy_vignette.py``.
"""
import numpy as np

from robustdecide import run_pipeline
from robustdecide.core import additive_scores, score_first_choice
from robustdecide.io import baseline_weight_vector, load_vignette

scen = load_vignette()
problem = scen.problem
print(f"scenario: {problem.name}")
print("actions:", ", ".join(problem.actions.ids))

# %% A weighted-sum scorer folds every attribute into one number.
w = baseline_weight_vector(problem, scen.baseline_weights)
scores = additive_scores(problem.actions.attributes, w)
for a, s in zip(problem.actions.ids, scores):
    print(f"  {a:<11} score {s:.3f}")
print("score-first pick:", score_first_choice(problem.actions, w))

# %% The staged layer screens before it compares.
out = run_pipeline(problem)
for stage, trace in out.trace.items():
    for e in trace.eliminated:
        print(f"[{stage}] {e.action}: {e.reason}" + (f" (by {e.by})" if e.by else ""))
print("epsilon classes:", [list(c) for c in out.epsilon_classes])
rec = out.recommendation
print(f"recommendation: {rec.kind} {list(rec.actions)}")
print("note:", rec.note)

# %% The highest scorer was never available: it fails the affordability constraint.
print("score-first pick feasible?", set(score_first_choice(problem.actions, w)) <= set(out.feasible_set))
print("decision gap:", np.round([out.gap.lower, out.gap.upper], 3), "fragile" if out.gap.fragile else "robust")
