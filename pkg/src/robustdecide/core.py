"""Domain types and expected-utility primitives.

Everything downstream (dominance filtering, robust criteria, the staged
pipeline) works from a :class:`DecisionProblem`: a finite action set, a
finite state space, a credal set given by its vertices and a preference set
given as a list of complete utility tables.

Because expected utility is linear in the belief, extremal values over the
convex hull of a credal set are attained at its vertices, so every
"for all plausible beliefs" statement here is decided by enumerating
vertices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np
from numpy.typing import NDArray

#: Absolute tolerance for probability sums and utility equality.
TOL = 1e-9


@dataclass(frozen=True)
class StateSpace:
    ids: tuple[str, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "labels", tuple(self.labels) or self.ids)

    def __len__(self) -> int:
        return len(self.ids)

    def index(self, state_id: str) -> int:
        return self.ids.index(state_id)


@dataclass(frozen=True)
class ActionSet:
    """Ordered action identifiers.

    ``attributes`` optionally holds a real attribute vector per action
    (rows follow ``ids``) with named columns ``attribute_names``; it feeds
    Pareto filtering and the additive score-first baseline.
    """

    ids: tuple[str, ...]
    labels: tuple[str, ...] = ()
    attributes: NDArray[np.float64] | None = None
    attribute_names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "labels", tuple(self.labels) or self.ids)
        object.__setattr__(self, "attribute_names", tuple(self.attribute_names))
        if self.attributes is not None:
            object.__setattr__(
                self, "attributes", np.asarray(self.attributes, dtype=float)
            )

    def __len__(self) -> int:
        return len(self.ids)

    def index(self, action_id: str) -> int:
        return self.ids.index(action_id)


@dataclass(frozen=True)
class Belief:
    probabilities: NDArray[np.float64]

    def __post_init__(self):
        object.__setattr__(
            self, "probabilities", np.asarray(self.probabilities, dtype=float)
        )

    def is_normalized(self, tol: float = TOL) -> bool:
        p = self.probabilities
        return bool(np.all(p >= -tol) and abs(p.sum() - 1.0) <= tol)


@dataclass(frozen=True)
class CredalSet:
    vertices: tuple[Belief, ...]

    def __post_init__(self):
        verts = tuple(
            v if isinstance(v, Belief) else Belief(v) for v in self.vertices
        )
        object.__setattr__(self, "vertices", verts)

    def __len__(self) -> int:
        return len(self.vertices)

    def matrix(self) -> NDArray[np.float64]:
        """Vertices stacked as a ``(n_vertices, n_states)`` array."""
        return np.vstack([v.probabilities for v in self.vertices])

    def restrict(self, keep: Sequence[int]) -> "CredalSet":
        return CredalSet(tuple(self.vertices[i] for i in keep))


@dataclass(frozen=True)
class UtilityModel:
    """Utility table with rows indexed by action and columns by state.

    Missing cells are encoded as NaN and reported by :func:`validate_problem`.
    """

    table: NDArray[np.float64]
    name: str = "default"

    def __post_init__(self):
        object.__setattr__(self, "table", np.asarray(self.table, dtype=float))

    def affine(self, scale: float, shift: float = 0.0) -> "UtilityModel":
        return UtilityModel(scale * self.table + shift, self.name)


@dataclass(frozen=True)
class PreferenceSet:
    members: tuple[UtilityModel, ...]

    def __post_init__(self):
        members = tuple(
            m if isinstance(m, UtilityModel) else UtilityModel(m)
            for m in self.members
        )
        object.__setattr__(self, "members", members)

    def __len__(self) -> int:
        return len(self.members)

    def names(self) -> list[str]:
        return [m.name for m in self.members]


@dataclass(frozen=True)
class InformationAction:
    """A test or question that can be acquired before acting.

    Each finding keeps a subset of the credal vertices (``retained[f]``).
    ``likelihood[f, v]`` is the probability of finding ``f`` when vertex
    ``v`` of the current credal set is the truth; columns sum to one.
    """

    id: str
    cost: float
    findings: tuple[str, ...]
    retained: tuple[tuple[int, ...], ...]
    likelihood: NDArray[np.float64]

    def __post_init__(self):
        object.__setattr__(self, "findings", tuple(self.findings))
        object.__setattr__(
            self, "retained", tuple(tuple(int(i) for i in r) for r in self.retained)
        )
        object.__setattr__(
            self, "likelihood", np.asarray(self.likelihood, dtype=float)
        )


@dataclass(frozen=True)
class DecisionProblem:
    """Complete input to the decision layer.

    ``constraints`` maps a constraint name to per-action pass flags.
    ``safety_grades`` maps actions to a grade from ``safety_scale`` (listed
    from safest to least safe). ``tie_break`` names the cardinal rule allowed
    to pick inside a single surviving indifference class, or ``None``.
    """

    states: StateSpace
    actions: ActionSet
    credal: CredalSet
    preferences: PreferenceSet
    constraints: Mapping[str, Mapping[str, bool]] = field(default_factory=dict)
    epsilon: float = 0.0
    info_actions: tuple[InformationAction, ...] = ()
    safety_grades: Mapping[str, str] | None = None
    safety_scale: tuple[str, ...] = ("Low", "Moderate", "High")
    tie_break: str | None = None
    voi_weight: float = 1.0
    name: str = ""

    @cached_property
    def eu(self) -> NDArray[np.float64]:
        """Expected utilities as a ``(n_vertices, n_members, n_actions)`` array."""
        B = self.credal.matrix()
        U = np.stack([m.table for m in self.preferences.members])
        return np.einsum("vs,mas->vma", B, U)

    def eu_pairs(self) -> NDArray[np.float64]:
        """EU with the (vertex, member) pairs flattened: ``(n_pairs, n_actions)``."""
        e = self.eu
        return e.reshape(-1, e.shape[-1])

    def action_indices(self, actions: Sequence[str] | None = None) -> list[int]:
        if actions is None:
            return list(range(len(self.actions)))
        return [self.actions.index(a) for a in actions]

    def pair_label(self, flat_index: int) -> tuple[int, str]:
        """Map a flattened pair index to ``(vertex index, member name)``."""
        n_m = len(self.preferences)
        v, m = divmod(int(flat_index), n_m)
        return v, self.preferences.members[m].name

    def with_utilities(self, scale: float, shift: float = 0.0) -> "DecisionProblem":
        """Copy with every utility table mapped by ``scale * u + shift`` and
        epsilon scaled to match."""
        prefs = PreferenceSet(
            tuple(m.affine(scale, shift) for m in self.preferences.members)
        )
        return _replace(self, preferences=prefs, epsilon=self.epsilon * scale)

    def with_credal(self, credal: CredalSet) -> "DecisionProblem":
        return _replace(self, credal=credal)

    def with_epsilon(self, epsilon: float) -> "DecisionProblem":
        return _replace(self, epsilon=float(epsilon))


def _replace(problem: DecisionProblem, **changes) -> DecisionProblem:
    # dataclasses.replace would copy the cached EU tensor through __dict__
    kwargs = {f: getattr(problem, f) for f in problem.__dataclass_fields__}
    kwargs.update(changes)
    return DecisionProblem(**kwargs)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_problem(problem: DecisionProblem) -> ValidationReport:
    """Collect every structural problem with ``problem``; never raises."""
    out: list[str] = []
    n_s, n_a = len(problem.states), len(problem.actions)
    if n_s == 0:
        out.append("state space is empty")
    if n_a == 0:
        out.append("action set is empty")
    for kind, ids in (("state", problem.states.ids), ("action", problem.actions.ids)):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        if dupes:
            out.append(f"duplicate {kind} identifiers: {', '.join(dupes)}")

    if len(problem.credal) == 0:
        out.append("credal set has no vertices")
    for k, v in enumerate(problem.credal.vertices):
        p = v.probabilities
        if p.shape != (n_s,):
            out.append(f"belief vertex {k} has {p.size} entries for {n_s} states")
            continue
        if not np.all(np.isfinite(p)) or np.any(p < -TOL):
            out.append(f"belief vertex {k} has negative or non-finite entries")
        elif abs(p.sum() - 1.0) > TOL:
            out.append(f"belief vertex {k} not normalized (sums to {p.sum():.12g})")

    if len(problem.preferences) == 0:
        out.append("preference set has no members")
    names = problem.preferences.names()
    for m in problem.preferences.members:
        t = m.table
        if t.shape != (n_a, n_s) or np.isnan(t).any():
            out.append(f"incomplete utility table for member '{m.name}'")
        elif not np.all(np.isfinite(t)):
            out.append(f"non-finite utility in member '{m.name}'")
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        out.append(f"duplicate preference member names: {', '.join(dupes)}")

    if not np.isfinite(problem.epsilon) or problem.epsilon < 0:
        out.append(f"epsilon must be a finite non-negative number, got {problem.epsilon}")
    if problem.voi_weight < 0:
        out.append("voi_weight must be non-negative")

    for cname, flags in problem.constraints.items():
        missing = [a for a in problem.actions.ids if a not in flags]
        if missing:
            out.append(f"constraint '{cname}' missing actions: {', '.join(missing)}")
        extra = [a for a in flags if a not in problem.actions.ids]
        if extra:
            out.append(f"constraint '{cname}' names unknown actions: {', '.join(extra)}")

    if problem.safety_grades is not None:
        for a in problem.actions.ids:
            g = problem.safety_grades.get(a)
            if g is None:
                out.append(f"missing safety grade for action '{a}'")
            elif g not in problem.safety_scale:
                out.append(f"safety grade '{g}' for '{a}' not on scale")

    if problem.tie_break not in (None, "minimax_regret", "gamma_maximin"):
        out.append(f"unknown tie_break rule '{problem.tie_break}'")

    n_v = len(problem.credal)
    for u in problem.info_actions:
        L = u.likelihood
        if u.cost < 0:
            out.append(f"info action '{u.id}' has negative cost")
        if L.shape != (len(u.findings), n_v):
            out.append(f"info action '{u.id}' likelihood must be findings x vertices")
            continue
        if np.any(L < -TOL) or np.any(np.abs(L.sum(axis=0) - 1.0) > TOL):
            out.append(f"info action '{u.id}' finding probabilities not normalized")
        if len(u.retained) != len(u.findings):
            out.append(f"info action '{u.id}' needs one retained-vertex set per finding")
        for f, keep in zip(u.findings, u.retained):
            if not keep or any(not 0 <= i < n_v for i in keep):
                out.append(f"info action '{u.id}' finding '{f}' retains invalid vertices")
    return ValidationReport(tuple(out))


def expected_utility(action: int, belief: Belief | NDArray, utility: UtilityModel) -> float:
    """Expected utility of the action in row ``action`` of ``utility.table``."""
    b = belief.probabilities if isinstance(belief, Belief) else np.asarray(belief, float)
    return float(b @ utility.table[action])


def eu_bounds(
    action: int, credal: CredalSet, prefs: PreferenceSet
) -> tuple[float, float]:
    """Lower and upper expected utility over all (vertex, member) pairs."""
    vals = [
        expected_utility(action, v, m) for v in credal.vertices for m in prefs.members
    ]
    return min(vals), max(vals)


def additive_scores(
    attributes: NDArray, weights: Sequence[float]
) -> NDArray[np.float64]:
    """Compensatory weighted-sum score per row of ``attributes``."""
    return np.asarray(attributes, float) @ np.asarray(weights, float)


def score_first_choice(actions: ActionSet, weights: Sequence[float]) -> list[str]:
    """All actions attaining the maximal additive score (the score-first baseline)."""
    if actions.attributes is None:
        raise ValueError("action set carries no attribute vectors")
    s = additive_scores(actions.attributes, weights)
    best = s.max()
    return [a for a, v in zip(actions.ids, s) if v >= best - TOL]


def make_problem(
    utilities: Sequence | NDArray,
    beliefs: Sequence | NDArray,
    *,
    action_ids: Sequence[str] | None = None,
    state_ids: Sequence[str] | None = None,
    member_names: Sequence[str] | None = None,
    **kwargs,
) -> DecisionProblem:
    """Build a problem from raw arrays.

    ``utilities`` is ``(n_members, n_actions, n_states)`` (a 2-D table is
    treated as a single member) and ``beliefs`` is ``(n_vertices, n_states)``
    (1-D for a single precise belief).
    """
    U = np.asarray(utilities, dtype=float)
    if U.ndim == 2:
        U = U[None]
    B = np.atleast_2d(np.asarray(beliefs, dtype=float))
    n_m, n_a, n_s = U.shape
    action_ids = list(action_ids or [f"a{i}" for i in range(n_a)])
    state_ids = list(state_ids or [f"x{i}" for i in range(n_s)])
    member_names = list(member_names or [f"pi{i}" for i in range(n_m)])
    return DecisionProblem(
        states=StateSpace(tuple(state_ids)),
        actions=ActionSet(tuple(action_ids)),
        credal=CredalSet(tuple(Belief(b) for b in B)),
        preferences=PreferenceSet(
            tuple(UtilityModel(U[k], member_names[k]) for k in range(n_m))
        ),
        **kwargs,
    )
