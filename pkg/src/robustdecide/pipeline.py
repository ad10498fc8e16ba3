"""The staged decision layer.

``run_pipeline`` reduces the action set in order: hard constraints, the
safety-priority screen (when grades are supplied), epsilon-dominance
filtering, and epsilon-indifference grouping. Only then does it consider a
controlled tie-break or a value-of-information request, and otherwise it
hands back the admissible set.

An action removed at one stage is never reconsidered later.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import special, stats

from .core import TOL, DecisionProblem, validate_problem
from .criteria import gamma_maximin, minimax_regret
from .dominance import (
    Elimination,
    FilterTrace,
    epsilon_classes,
    maximal_set,
    pairwise_gaps,
)

ACT = "act"
REQUEST_INFO = "request_info"
PRESENT_SET = "present_set"


@dataclass(frozen=True)
class Recommendation:
    kind: str
    actions: tuple[str, ...] = ()
    info_action: str | None = None
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "actions": list(self.actions),
            "info_action": self.info_action,
            "note": self.note,
        }


@dataclass(frozen=True)
class DecisionGap:
    lower: float
    upper: float
    fragile: bool
    nominal_best: str | None = None


@dataclass(frozen=True)
class VOIResult:
    request: str | None
    impacts: dict[str, float] = field(default_factory=dict)
    expected_reduction: dict[str, float] = field(default_factory=dict)
    finding_rule: str = "vertex-average"

    @property
    def finalize(self) -> bool:
        return self.request is None


@dataclass(frozen=True)
class DecisionOutcome:
    feasible_set: tuple[str, ...]
    safe_set: tuple[str, ...]
    undominated_set: tuple[str, ...]
    epsilon_classes: tuple[tuple[str, ...], ...]
    recommendation: Recommendation
    trace: dict[str, FilterTrace]
    infeasible: bool = False
    voi: VOIResult | None = None
    gap: DecisionGap | None = None
    pairwise_gaps: dict[tuple[str, str], float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "feasible_set": list(self.feasible_set),
            "safe_set": list(self.safe_set),
            "undominated_set": list(self.undominated_set),
            "epsilon_classes": [list(c) for c in self.epsilon_classes],
            "recommendation": self.recommendation.to_dict(),
            "infeasible": self.infeasible,
            "trace": {k: v.to_dict() for k, v in self.trace.items()},
            "pairwise_gaps": [
                {"a": a, "b": b, "max_abs_gap": g}
                for (a, b), g in self.pairwise_gaps.items()
            ],
            "voi": None
            if self.voi is None
            else {
                "request": self.voi.request,
                "impacts": self.voi.impacts,
                "expected_reduction": self.voi.expected_reduction,
                "finding_rule": self.voi.finding_rule,
            },
            "gap": None
            if self.gap is None
            else {
                "lower": self.gap.lower,
                "upper": self.gap.upper,
                "fragile": self.gap.fragile,
                "nominal_best": self.gap.nominal_best,
            },
        }


def apply_constraints(
    problem: DecisionProblem, actions: Sequence[str] | None = None
) -> FilterTrace:
    """Keep actions passing every hard constraint. An empty survivor set is
    a legitimate (infeasible) result, not an error."""
    ids = list(problem.actions.ids if actions is None else actions)
    survivors, eliminated = [], []
    for a in ids:
        failed = [c for c, flags in problem.constraints.items() if not flags[a]]
        if failed:
            eliminated.append(
                Elimination(a, "violates constraint " + ", ".join(f"'{c}'" for c in failed))
            )
        else:
            survivors.append(a)
    return FilterTrace(tuple(survivors), tuple(eliminated))


def safety_lexicographic_filter(
    actions: Sequence[str],
    safety_grade: Mapping[str, str],
    scale: Sequence[str] = ("Low", "Moderate", "High"),
) -> FilterTrace:
    """Keep the actions whose safety grade is the best one present.

    ``scale`` lists grades from safest to least safe. Any action in a worse
    class is eliminated whatever its other merits.
    """
    rank = {g: i for i, g in enumerate(scale)}
    for a in actions:
        if a not in safety_grade:
            raise ValueError(f"missing safety grade for action {a!r}")
        if safety_grade[a] not in rank:
            raise ValueError(f"grade {safety_grade[a]!r} of {a!r} not on scale {list(scale)}")
    if not actions:
        return FilterTrace(())
    best = min(rank[safety_grade[a]] for a in actions)
    leader = next(a for a in actions if rank[safety_grade[a]] == best)
    survivors, eliminated = [], []
    for a in actions:
        if rank[safety_grade[a]] == best:
            survivors.append(a)
        else:
            eliminated.append(
                Elimination(
                    a,
                    f"safety grade {safety_grade[a]} worse than {scale[best]}",
                    by=leader,
                )
            )
    return FilterTrace(tuple(survivors), tuple(eliminated))


def voi_gate(
    problem: DecisionProblem,
    survivors: Sequence[str],
    info_actions=None,
) -> VOIResult:
    """Single-step value-of-information check.

    For each candidate, the impact is the expected drop in the number of
    surviving actions once its finding is known, times
    ``problem.voi_weight``, minus its cost. Finding probabilities are the
    average over credal vertices of the vertex-conditional probabilities.
    The best candidate is requested only if its impact is positive.
    """
    info_actions = problem.info_actions if info_actions is None else info_actions
    survivors = list(survivors)
    if len(survivors) <= 1 or not info_actions:
        return VOIResult(None)
    impacts, reductions = {}, {}
    for u in info_actions:
        p_find = np.asarray(u.likelihood, float).mean(axis=1)
        expected = 0.0
        for p, keep in zip(p_find, u.retained):
            if p <= 0:
                continue
            sub = problem.with_credal(problem.credal.restrict(keep))
            after = maximal_set(sub, survivors, epsilon=problem.epsilon).survivors
            expected += p * (len(survivors) - len(after))
        reductions[u.id] = float(expected)
        impacts[u.id] = float(problem.voi_weight * expected - u.cost)
    best = max(impacts, key=lambda k: impacts[k])  # first on ties
    chosen = best if impacts[best] > TOL else None
    return VOIResult(chosen, impacts, reductions)


def decision_gap(
    problem: DecisionProblem,
    nominal_vertex: int = 0,
    nominal_member: int = 0,
    actions: Sequence[str] | None = None,
) -> DecisionGap:
    """Range of the margin between the nominal best action and its runner-up
    across every (vertex, member) pair.

    The best action is fixed at the nominal pair (first index on ties).
    Fewer than two actions leave the gap undefined; that is reported as an
    infinite, non-fragile gap.
    """
    ids = list(apply_constraints(problem).survivors if actions is None else actions)
    if len(ids) < 2:
        return DecisionGap(math.inf, math.inf, False, ids[0] if ids else None)
    E = problem.eu[:, :, problem.action_indices(ids)]
    nominal = E[nominal_vertex, nominal_member]
    star = int(np.argmax(nominal))
    flat = E.reshape(-1, len(ids))
    others = np.delete(flat, star, axis=1)
    G = flat[:, star] - others.max(axis=1)
    lower, upper = float(G.min()), float(G.max())
    return DecisionGap(lower, upper, lower <= problem.epsilon, ids[star])


def _discriminating_note(problem: DecisionProblem, actions: Sequence[str]) -> str:
    # which preference members favour which survivors at the credal centroid
    centroid = problem.credal.matrix().mean(axis=0)
    idx = problem.action_indices(actions)
    favoured: dict[tuple[str, ...], list[str]] = {}
    for m in problem.preferences.members:
        eu = m.table[idx] @ centroid
        top = tuple(a for a, v in zip(actions, eu) if v >= eu.max() - TOL)
        favoured.setdefault(top, []).append(m.name)
    if len(favoured) <= 1:
        return "preference members agree; ambiguity comes from the belief set"
    parts = [f"{'/'.join(ms)} favour {', '.join(top)}" for top, ms in favoured.items()]
    return "survivors separated by preferences: " + "; ".join(parts)


def _tie_break(problem: DecisionProblem, cls: Sequence[str]) -> tuple[tuple[str, ...], str]:
    rule = problem.tie_break
    if rule == "gamma_maximin":
        chosen, value = gamma_maximin(cls, problem)
        return chosen, f"gamma-maximin tie-break (worst-case EU {value:.6g})"
    if rule == "minimax_regret":
        if len(problem.preferences) != 1:
            return tuple(cls), "minimax-regret tie-break skipped: preference set not narrowed to one member"
        chosen, value = minimax_regret(cls, problem)
        return chosen, f"minimax-regret tie-break (max regret {value:.6g})"
    return tuple(cls), ""


def run_pipeline(problem: DecisionProblem, with_gap: bool = True) -> DecisionOutcome:
    """Run every stage of the decision layer on a validated problem."""
    report = validate_problem(problem)
    if not report.ok:
        raise ValueError("invalid problem: " + "; ".join(report.violations))

    trace: dict[str, FilterTrace] = {}
    feas = apply_constraints(problem)
    trace["constraints"] = feas
    if not feas.survivors:
        rec = Recommendation(PRESENT_SET, (), note="infeasible: every action violates a hard constraint")
        return DecisionOutcome((), (), (), (), rec, trace, infeasible=True)

    if problem.safety_grades is not None:
        safe = safety_lexicographic_filter(
            feas.survivors, problem.safety_grades, problem.safety_scale
        )
    else:
        safe = FilterTrace(feas.survivors)
    trace["safety"] = safe

    dom = maximal_set(problem, safe.survivors, epsilon=problem.epsilon)
    trace["dominance"] = dom
    undominated = dom.survivors
    classes = tuple(epsilon_classes(undominated, problem))
    gaps = pairwise_gaps(problem, undominated)
    gap = decision_gap(problem, actions=undominated) if with_gap else None

    def done(rec, voi=None):
        return DecisionOutcome(
            feas.survivors, safe.survivors, undominated, classes, rec, trace,
            voi=voi, gap=gap, pairwise_gaps=gaps,
        )

    if len(undominated) == 1:
        return done(Recommendation(ACT, undominated, note="single undominated action"))

    if len(classes) == 1 and problem.tie_break:
        chosen, note = _tie_break(problem, classes[0])
        if len(chosen) == 1:
            return done(Recommendation(ACT, chosen, note=note))

    voi = voi_gate(problem, undominated)
    if voi.request is not None:
        return done(
            Recommendation(
                REQUEST_INFO, undominated, info_action=voi.request,
                note=f"expected impact {voi.impacts[voi.request]:.6g} exceeds cost",
            ),
            voi,
        )
    if len(classes) == 1:
        note = f"indistinguishable within epsilon={problem.epsilon:g}"
    else:
        note = _discriminating_note(problem, undominated)
    return done(Recommendation(PRESENT_SET, undominated, note=note), voi)


def decision_margin_flip_probability(delta: float, sigma: float) -> float:
    """Probability that Gaussian estimation error of scale ``sigma`` reverses
    a true expected-utility margin ``delta``: ``Phi(-delta / sigma)``."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return float(special.ndtr(-delta / sigma))


@dataclass(frozen=True)
class ErrorCDF:
    """Symmetric, zero-centred error distribution.

    ``kind`` is "gaussian" (``scale`` = sigma), "student_t" (``df``,
    ``scale``) or "empirical" (``sample``, symmetrised about zero).
    """

    kind: str
    scale: float = 1.0
    df: float | None = None
    sample: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("gaussian", "student_t", "empirical"):
            raise ValueError(f"unsupported error distribution {self.kind!r}")
        if self.kind != "empirical" and not self.scale > 0:
            raise ValueError("scale must be positive")
        if self.kind == "student_t" and not (self.df is not None and self.df > 0):
            raise ValueError("student_t needs df > 0")
        if self.kind == "empirical" and len(self.sample) == 0:
            raise ValueError("empirical distribution needs a non-empty sample")

    def __call__(self, t: float) -> float:
        if self.kind == "gaussian":
            return float(special.ndtr(t / self.scale))
        if self.kind == "student_t":
            return float(stats.t.cdf(t / self.scale, self.df))
        s = np.abs(np.asarray(self.sample, float))
        both = np.concatenate([s, -s])
        # mid-distribution CDF keeps F(0) = 1/2 when the sample holds zeros
        return float(((both < t).sum() + 0.5 * (both == t).sum()) / both.size)


def parse_error_cdf(spec) -> ErrorCDF:
    """Accept an :class:`ErrorCDF`, a dict of its fields, or a string such as
    ``"gaussian:0.5"``, ``"student_t:3:1.0"`` or ``"empirical:-0.2,0.1,0.4"``."""
    if isinstance(spec, ErrorCDF):
        return spec
    try:
        if isinstance(spec, Mapping):
            d = dict(spec)
            if "sample" in d:
                d["sample"] = tuple(float(x) for x in d["sample"])
            return ErrorCDF(**d)
        kind, _, rest = str(spec).partition(":")
        if kind == "gaussian":
            return ErrorCDF("gaussian", scale=float(rest or 1.0))
        if kind == "student_t":
            df, _, scale = rest.partition(":")
            return ErrorCDF("student_t", scale=float(scale or 1.0), df=float(df))
        if kind == "empirical":
            return ErrorCDF("empirical", sample=tuple(float(x) for x in rest.split(",")))
    except (TypeError, ValueError) as exc:
        raise ValueError(f"invalid error distribution spec {spec!r}: {exc}") from exc
    raise ValueError(f"invalid error distribution spec {spec!r}")


def flip_probability_general_cdf(delta: float, cdf) -> float:
    """Flip probability ``F(-delta)`` under a symmetric error distribution."""
    return parse_error_cdf(cdf)(-delta)


ROBUST_TREAT = "robust_treat"
ROBUST_WITHHOLD = "robust_withhold"
FRAGILE = "fragile"


def _interval(x, name: str) -> tuple[float, float]:
    if np.isscalar(x):
        lo = hi = float(x)
    else:
        lo, hi = (float(v) for v in x)
    if not (0.0 <= lo <= hi <= 1.0):
        raise ValueError(f"{name} must satisfy 0 <= lo <= hi <= 1, got ({lo}, {hi})")
    return lo, hi


def threshold_interval_overlap(p_interval, p_star_interval) -> str:
    """Treat/withhold verdict for an uncertain risk against an uncertain
    threshold; overlapping intervals give "fragile"."""
    p_lo, p_hi = _interval(p_interval, "risk interval")
    t_lo, t_hi = _interval(p_star_interval, "threshold interval")
    if p_lo > t_hi:
        return ROBUST_TREAT
    if p_hi < t_lo:
        return ROBUST_WITHHOLD
    return FRAGILE
