"""Learn a fast-and-frugal tree and read it with interval-valued cues."""
import numpy as np

from robustdecide.heuristics import CueDataset, fft_confusion, fft_decide, fft_decide_interval, fft_learn

rng = np.random.default_rng(0)
n = 600
chest_pain = rng.integers(0, 2, n)
st_change = rng.integers(0, 2, n)
age = rng.normal(60, 12, n).round()
risk = 0.1 + 0.5 * st_change + 0.25 * chest_pain + 0.004 * (age - 60)
y = (rng.random(n) < np.clip(risk, 0, 1)).astype(int)
data = CueDataset(np.column_stack([chest_pain, st_change, age]), y, ("chest_pain", "st_change", "age"))

for ordering in ("validity", "accuracy"):
    tree = fft_learn(data, max_depth=3, ordering=ordering)
    print(f"--- ordering by {ordering}")
    print(tree.describe())
    print("training", fft_confusion(tree, data).to_dict())

# %% A patient is judged by the first cue that settles it; later cues are never read.
tree = fft_learn(data, max_depth=3)
print(fft_decide(tree, [1, 1, 45]))

# %% An interval straddling a split cannot exit there. Keep every earlier level
# on its continue branch and leave the final cue uncertain.
profile = [(0.0, 0.0)] * 3
for node in tree.levels[:-1]:
    v = 0.0 if node.exit_side == "positive" else 1.0
    profile[node.cue] = (v, v)
last = tree.levels[-1]
profile[last.cue] = (last.threshold - 20, last.threshold + 20)
print("profile", profile)
print(fft_decide_interval(tree, profile))
print(fft_decide_interval(tree, profile, abstain_policy="other"))
