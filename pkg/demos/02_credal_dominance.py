"""Robust dominance, E-admissibility and point criteria on a small credal problem."""
import numpy as np

from robustdecide import make_problem
from robustdecide.criteria import e_admissible_set, gamma_maximax, gamma_maximin, minimax_regret, regret_table
from robustdecide.dominance import epsilon_classes, maximal_set, robust_dominates

# Three actions, two states, beliefs ranging between two vertices.
U = np.array([
    [10.0, 0.0],   # aggressive
    [7.0, 7.0],    # steady
    [6.0, 5.0],    # timid
])
problem = make_problem(U, [[0.8, 0.2], [0.3, 0.7]], action_ids=["aggressive", "steady", "timid"])
print("EU per (vertex, action):\n", problem.eu[:, 0, :])

# %% Dominance needs a verdict at every vertex.
for a, b in [("steady", "timid"), ("aggressive", "steady")]:
    v = robust_dominates(a, b, problem)
    print(f"{a} vs {b}: {v.relation}", f"witness {v.witness}" if v.witness else "")
print("maximal set:", maximal_set(problem).survivors)
print("E-admissible:", e_admissible_set(None, problem))

# %% Point criteria once the set has been narrowed.
print("gamma-maximin:", gamma_maximin(None, problem))
print("gamma-maximax:", gamma_maximax(None, problem))
print("regret table:\n", regret_table(None, problem).regret)
print("minimax regret:", minimax_regret(None, problem))

# %% A margin epsilon groups near-ties that the evidence cannot separate.
for eps in (0.0, 1.0, 4.0):
    print(f"epsilon={eps}: classes {epsilon_classes(maximal_set(problem).survivors, problem, eps)}")
