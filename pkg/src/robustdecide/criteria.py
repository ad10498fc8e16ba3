"""Point-selection criteria for use after dominance filtering.

All criteria return every tied optimum; breaking ties is left to the caller.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .core import TOL, DecisionProblem, UtilityModel
from .dominance import _dominance_matrix


class MeasurementCaveat(ValueError):
    """Raised when a difference-based criterion is asked to run over an
    ambiguous preference set."""


def _ids(problem: DecisionProblem, actions: Sequence[str] | None) -> list[str]:
    ids = list(problem.actions.ids if actions is None else actions)
    if not ids:
        raise ValueError("actions must be non-empty")
    return ids


def _argmax_all(values: NDArray, ids: Sequence[str]) -> tuple[str, ...]:
    best = values.max()
    return tuple(a for a, v in zip(ids, values) if v >= best - TOL)


def gamma_maximin(
    actions: Sequence[str] | None, problem: DecisionProblem
) -> tuple[tuple[str, ...], float]:
    """Actions with the best worst-case expected utility, and that value."""
    ids = _ids(problem, actions)
    worst = problem.eu_pairs()[:, problem.action_indices(ids)].min(axis=0)
    return _argmax_all(worst, ids), float(worst.max())


def gamma_maximax(
    actions: Sequence[str] | None, problem: DecisionProblem
) -> tuple[tuple[str, ...], float]:
    """Actions with the best best-case expected utility, and that value."""
    ids = _ids(problem, actions)
    best = problem.eu_pairs()[:, problem.action_indices(ids)].max(axis=0)
    return _argmax_all(best, ids), float(best.max())


def e_admissible_set(
    actions: Sequence[str] | None, problem: DecisionProblem
) -> tuple[str, ...]:
    """Actions that maximise expected utility for at least one
    (vertex, member) pair.

    Ties at a pair admit every tied action except one that another tied
    action weakly dominates (never worse, better somewhere): such an action
    is optimal only where its dominator is too.
    """
    ids = _ids(problem, actions)
    E = problem.eu_pairs()[:, problem.action_indices(ids)]
    hit = E >= E.max(axis=1, keepdims=True) - TOL
    dominated = _dominance_matrix(E, 0.0).any(axis=0)
    keep = hit.any(axis=0) & ~dominated
    return tuple(a for a, k in zip(ids, keep) if k)


@dataclass(frozen=True)
class RegretTable:
    actions: tuple[str, ...]
    states: tuple[str, ...]
    regret: NDArray[np.float64]  # (n_actions, n_states), non-negative
    best: tuple[tuple[str, ...], ...]  # tied best actions per state

    def max_regret(self) -> NDArray[np.float64]:
        return self.regret.max(axis=1)


def _member(problem: DecisionProblem, member) -> UtilityModel:
    if isinstance(member, UtilityModel):
        return member
    if member is None:
        if len(problem.preferences) != 1:
            raise MeasurementCaveat(
                "regret needs utility differences to be meaningful; narrow the "
                f"preference set to one member first (have {len(problem.preferences)})"
            )
        return problem.preferences.members[0]
    if isinstance(member, int):
        return problem.preferences.members[member]
    for m in problem.preferences.members:
        if m.name == member:
            return m
    raise KeyError(f"no preference member named {member!r}")


def regret_table(
    actions: Sequence[str] | None,
    problem: DecisionProblem,
    member: UtilityModel | str | int | None = None,
) -> RegretTable:
    """State-wise regret ``max_b U(b, x) - U(a, x)`` over ``actions``."""
    ids = _ids(problem, actions)
    U = _member(problem, member).table[problem.action_indices(ids)]
    top = U.max(axis=0)
    R = np.maximum(top[None, :] - U, 0.0)
    best = tuple(
        tuple(a for a, u in zip(ids, U[:, s]) if u >= top[s] - TOL)
        for s in range(U.shape[1])
    )
    return RegretTable(tuple(ids), problem.states.ids, R, best)


def minimax_regret(
    actions: Sequence[str] | None,
    problem: DecisionProblem,
    member: UtilityModel | str | int | None = None,
) -> tuple[tuple[str, ...], float]:
    """Actions minimising worst-case state regret, and that regret.

    ``member=None`` is only accepted for a single-member preference set.
    """
    table = regret_table(actions, problem, member)
    worst = table.max_regret()
    best = worst.min()
    chosen = tuple(a for a, r in zip(table.actions, worst) if r <= best + TOL)
    return chosen, float(best)
