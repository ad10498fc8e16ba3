"""Dominance relations and set reduction.

Pareto dominance works on raw objective vectors. Robust dominance and
epsilon-dominance compare two actions across every (credal vertex,
preference member) pair of a :class:`~robustdecide.core.DecisionProblem`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .core import TOL, DecisionProblem

DOMINATES = "dominates"
DOMINATED_BY = "dominated_by"
INCOMPARABLE = "incomparable"
EPSILON_INDIFFERENT = "epsilon_indifferent"


@dataclass(frozen=True)
class DominanceVerdict:
    relation: str
    witness: tuple[int, str] | None = None  # (vertex index, member name)
    gap: float | None = None  # EU(a) - EU(a') at the witness


@dataclass(frozen=True)
class Elimination:
    action: str
    reason: str
    by: str | None = None
    witness: tuple[int, str] | None = None


@dataclass(frozen=True)
class FilterTrace:
    survivors: tuple[str, ...]
    eliminated: tuple[Elimination, ...] = ()

    @property
    def eliminated_ids(self) -> tuple[str, ...]:
        return tuple(e.action for e in self.eliminated)

    def to_dict(self) -> dict:
        return {
            "survivors": list(self.survivors),
            "eliminated": [
                {
                    "action": e.action,
                    "reason": e.reason,
                    "by": e.by,
                    "witness": None
                    if e.witness is None
                    else {"vertex": e.witness[0], "member": e.witness[1]},
                }
                for e in self.eliminated
            ],
        }


def pareto_dominates(
    y: Sequence[float],
    y_prime: Sequence[float],
    sense: Sequence[str] | str = "min",
    epsilon: Sequence[float] | float = 0.0,
) -> bool:
    """True iff ``y`` is weakly better than ``y_prime`` everywhere and strictly
    better somewhere.

    ``sense`` gives "min" or "max" per objective. A non-zero per-objective
    ``epsilon`` gives additive epsilon-dominance: ``y`` may be worse by up to
    ``epsilon`` on an objective and still count as weakly better, but must be
    better by more than ``epsilon`` on at least one.
    """
    y = np.asarray(y, float)
    yp = np.asarray(y_prime, float)
    if y.shape != yp.shape or y.ndim != 1:
        raise ValueError(f"objective vectors differ in shape: {y.shape} vs {yp.shape}")
    if isinstance(sense, str):
        sense = [sense] * y.size
    if len(sense) != y.size:
        raise ValueError("sense must give one flag per objective")
    if any(s not in ("min", "max") for s in sense):
        raise ValueError(f"sense flags must be 'min' or 'max', got {list(sense)}")
    sign = np.array([1.0 if s == "min" else -1.0 for s in sense])
    eps = np.broadcast_to(np.asarray(epsilon, float), y.shape)
    # improvement > 0 means y is better on that objective
    improvement = sign * (yp - y)
    return bool(np.all(improvement >= -eps) and np.any(improvement > eps))


def pareto_front(Y: NDArray, sense: Sequence[str] | str = "min") -> list[int]:
    """Indices of rows of ``Y`` not Pareto-dominated by any other row."""
    Y = np.atleast_2d(np.asarray(Y, float))
    n = Y.shape[0]
    return [
        i
        for i in range(n)
        if not any(pareto_dominates(Y[j], Y[i], sense) for j in range(n) if j != i)
    ]


def _first_max(d: NDArray) -> int:
    # first pair attaining the maximum up to tolerance, stable under rescaling
    return int(np.flatnonzero(d >= d.max() - TOL * max(1.0, abs(d.max())))[0])


def _gaps(problem: DecisionProblem, a: str, b: str) -> NDArray[np.float64]:
    E = problem.eu_pairs()
    return E[:, problem.actions.index(a)] - E[:, problem.actions.index(b)]


def robust_dominates(a: str, a_prime: str, problem: DecisionProblem) -> DominanceVerdict:
    """Compare two actions across all (vertex, member) pairs.

    Epsilon-indifference is only reported for a problem with positive epsilon
    whose pairwise gaps all stay within it; identical actions under a zero
    epsilon come back incomparable.
    """
    d = _gaps(problem, a, a_prime)
    if np.all(d >= -TOL) and d.max() > TOL:
        k = _first_max(d)
        return DominanceVerdict(DOMINATES, problem.pair_label(k), float(d[k]))
    if np.all(d <= TOL) and d.min() < -TOL:
        k = _first_max(-d)
        return DominanceVerdict(DOMINATED_BY, problem.pair_label(k), float(d[k]))
    if problem.epsilon > 0 and np.abs(d).max() <= problem.epsilon + TOL:
        return DominanceVerdict(EPSILON_INDIFFERENT)
    return DominanceVerdict(INCOMPARABLE)


def epsilon_dominates(
    a: str, a_prime: str, problem: DecisionProblem, epsilon: float | None = None
) -> bool:
    """``a`` is never worse than ``a_prime`` and better by at least ``epsilon``
    for some pair. At ``epsilon=0`` the improvement must still exceed the
    numeric tolerance, so this reduces to robust dominance."""
    eps = problem.epsilon if epsilon is None else epsilon
    if eps < 0:
        raise ValueError("epsilon must be non-negative")
    d = _gaps(problem, a, a_prime)
    top = d.max()
    return bool(np.all(d >= -TOL) and top > TOL and top >= eps - TOL)


def _dominance_matrix(E: NDArray, eps: float) -> NDArray[np.bool_]:
    # D[i, j]: column i epsilon-dominates column j
    d = E[:, :, None] - E[:, None, :]
    top = d.max(axis=0)
    return np.all(d >= -TOL, axis=0) & (top > TOL) & (top >= eps - TOL)


def maximal_set(
    problem: DecisionProblem,
    actions: Sequence[str] | None = None,
    epsilon: float | None = 0.0,
) -> FilterTrace:
    """Drop every action dominated by another member of ``actions``.

    All pairwise verdicts are computed before anything is removed, so the
    survivors do not depend on elimination order. ``epsilon=None`` uses the
    problem's own margin; the default 0 gives plain maximality.
    """
    ids = list(problem.actions.ids if actions is None else actions)
    eps = problem.epsilon if epsilon is None else epsilon
    if not ids:
        return FilterTrace(())
    idx = problem.action_indices(ids)
    E = problem.eu_pairs()[:, idx]
    D = _dominance_matrix(E, eps)
    survivors, eliminated = [], []
    for j, a in enumerate(ids):
        doms = np.flatnonzero(D[:, j])
        if doms.size == 0:
            survivors.append(a)
            continue
        i = int(doms[0])
        k = _first_max(E[:, i] - E[:, j])
        reason = "robustly dominated" if eps <= 0 else "epsilon-dominated"
        eliminated.append(Elimination(a, reason, ids[i], problem.pair_label(k)))
    return FilterTrace(tuple(survivors), tuple(eliminated))


def pairwise_gaps(
    problem: DecisionProblem, actions: Sequence[str]
) -> dict[tuple[str, str], float]:
    """Largest absolute EU difference over all pairs, for each action pair."""
    idx = problem.action_indices(actions)
    E = problem.eu_pairs()[:, idx]
    out = {}
    for i in range(len(actions)):
        for j in range(i + 1, len(actions)):
            out[(actions[i], actions[j])] = float(np.abs(E[:, i] - E[:, j]).max())
    return out


def epsilon_classes(
    actions: Sequence[str], problem: DecisionProblem, epsilon: float | None = None
) -> list[tuple[str, ...]]:
    """Partition ``actions`` into connected components of the relation
    "EU differs by at most epsilon under every pair".

    The relation itself is not transitive; taking components groups chains
    of near-ties together. Classes are ordered by their first action.
    """
    eps = problem.epsilon if epsilon is None else epsilon
    if eps < 0:
        raise ValueError("epsilon must be non-negative")
    actions = list(actions)
    n = len(actions)
    if n == 0:
        return []
    idx = problem.action_indices(actions)
    E = problem.eu_pairs()[:, idx]
    close = np.abs(E[:, :, None] - E[:, None, :]).max(axis=0) <= eps + TOL
    label = [-1] * n
    for start in range(n):
        if label[start] >= 0:
            continue
        label[start] = start
        stack = [start]
        while stack:
            i = stack.pop()
            for j in np.flatnonzero(close[i]):
                if label[j] < 0:
                    label[j] = start
                    stack.append(int(j))
    groups: dict[int, list[str]] = {}
    for i, lab in enumerate(label):
        groups.setdefault(lab, []).append(actions[i])
    return [tuple(g) for _, g in sorted(groups.items())]
