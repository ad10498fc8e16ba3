"""Decision-centric evaluation: net benefit and decision curves, flip rates
under perturbation, set-valued coverage, and a brute-force reference
implementation of the decision layer for small problems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Hashable, Sequence

import numpy as np
from numpy.typing import NDArray

from .core import DecisionProblem


@dataclass(frozen=True)
class ClassifiedCohort:
    probabilities: NDArray[np.float64]
    labels: NDArray[np.int_]

    def __post_init__(self):
        p = np.asarray(self.probabilities, float).ravel()
        y = np.asarray(self.labels).astype(int).ravel()
        if p.size == 0:
            raise ValueError("cohort is empty")
        if p.size != y.size:
            raise ValueError("probabilities and labels differ in length")
        if np.any((p < 0) | (p > 1)) or not np.all(np.isfinite(p)):
            raise ValueError("probabilities must lie in [0, 1]")
        if not np.isin(y, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "labels", y)

    @property
    def n(self) -> int:
        return self.labels.size

    @property
    def prevalence(self) -> float:
        return float(self.labels.mean())


def _check_threshold(p_star: float) -> None:
    if not 0.0 < p_star < 1.0:
        raise ValueError(f"threshold must lie strictly between 0 and 1, got {p_star}")


def net_benefit_counts(tp: int, fp: int, n: int, p_star: float) -> float:
    _check_threshold(p_star)
    return tp / n - fp / n * (p_star / (1.0 - p_star))


def net_benefit(cohort: ClassifiedCohort, p_star: float) -> float:
    """Net benefit of treating exactly the cases with predicted risk above
    ``p_star`` (a case sitting on the threshold is not treated)."""
    _check_threshold(p_star)
    treat = cohort.probabilities > p_star
    tp = int((treat & (cohort.labels == 1)).sum())
    fp = int((treat & (cohort.labels == 0)).sum())
    return net_benefit_counts(tp, fp, cohort.n, p_star)


@dataclass(frozen=True)
class CurvePoint:
    p_star: float
    model: float
    treat_all: float
    treat_none: float


def decision_curve(cohort: ClassifiedCohort, p_star_grid: Sequence[float]) -> list[CurvePoint]:
    pos = int(cohort.labels.sum())
    neg = cohort.n - pos
    return [
        CurvePoint(
            float(t),
            net_benefit(cohort, t),
            net_benefit_counts(pos, neg, cohort.n, t),
            0.0,
        )
        for t in p_star_grid
    ]


PERTURBATION_KINDS = ("gaussian_noise", "missingness", "cue_flip")


@dataclass(frozen=True)
class PerturbationFamily:
    """Observation-level perturbations.

    ``scale`` is the noise standard deviation for ``gaussian_noise`` (scalar
    or one per feature) and the per-entry probability for ``missingness``
    (entry replaced by ``fill_value``) and ``cue_flip`` (entry ``x`` becomes
    ``1 - x``).
    """

    kind: str
    scale: float | tuple[float, ...]
    draws: int = 1000
    seed: int = 0
    fill_value: float = 0.0

    def __post_init__(self):
        if self.kind not in PERTURBATION_KINDS:
            raise ValueError(f"unknown perturbation kind {self.kind!r}")
        s = np.atleast_1d(np.asarray(self.scale, float))
        if np.any(s < 0) or not np.all(np.isfinite(s)):
            raise ValueError("perturbation scale must be non-negative")
        if self.kind != "gaussian_noise" and np.any(s > 1):
            raise ValueError("perturbation probability must lie in [0, 1]")
        if self.draws < 1:
            raise ValueError("draws must be at least 1")

    def perturbed(self, obs: NDArray, case: int) -> NDArray:
        """All ``draws`` perturbed copies of one observation, shape
        ``(draws, n_features)``.

        Each case owns a stream seeded from ``(seed, case)`` and draw ``j``
        is always row ``j`` of it, so results do not depend on the order in
        which cases are processed.
        """
        obs = np.atleast_1d(np.asarray(obs, float))
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=(case,)))
        )
        shape = (self.draws,) + obs.shape
        scale = np.broadcast_to(np.asarray(self.scale, float), obs.shape)
        if self.kind == "gaussian_noise":
            return obs + scale * rng.standard_normal(shape)
        hit = rng.random(shape) < scale
        if self.kind == "missingness":
            return np.where(hit, self.fill_value, obs)
        return np.where(hit, 1.0 - obs, obs)


@dataclass(frozen=True)
class FlipRate:
    rate: float
    std_error: float
    trials: int
    flips: int


def flip_rate(
    policy: Callable,
    cases: NDArray,
    family: PerturbationFamily,
    vectorized: bool = False,
) -> FlipRate:
    """Monte Carlo probability that a perturbed observation changes the
    policy's action, pooled over cases and draws, with its binomial
    standard error.

    ``cases`` is ``(n_cases, n_features)`` (1-D means one feature). With
    ``vectorized=True`` the policy receives a 2-D batch of observations and
    must return one action per row.
    """
    cases = np.asarray(cases, float)
    if cases.ndim == 1:
        cases = cases[:, None]
    flips = 0
    for i, obs in enumerate(cases):
        batch = family.perturbed(obs, i)
        if vectorized:
            base = np.asarray(policy(obs[None, :]))[0]
            flips += int(np.sum(np.asarray(policy(batch)) != base))
        else:
            base = policy(obs)
            flips += sum(policy(row) != base for row in batch)
    n = cases.shape[0] * family.draws
    r = flips / n
    return FlipRate(r, math.sqrt(r * (1.0 - r) / n), n, flips)


def threshold_policy(p_star: float, feature: int = 0) -> Callable:
    """Treat iff the risk in ``feature`` is strictly above ``p_star``.
    Works on one observation or a batch of rows."""
    return lambda obs: np.asarray(obs)[..., feature] > p_star


@dataclass(frozen=True)
class SetMetrics:
    coverage: float
    mean_set_size: float
    abstention_rate: float


def set_metrics(records: Sequence[tuple[Sequence[Hashable] | None, Hashable]]) -> SetMetrics:
    """Coverage, mean set size and abstention rate of set-valued outputs.

    Each record is ``(output set, reference action)``; an output of ``None``
    or an empty set is an abstention. Abstentions count as not covered and
    are excluded from the mean set size.
    """
    if len(records) == 0:
        raise ValueError("no records")
    covered, sizes, abstained = 0, [], 0
    for out, ref in records:
        if not out:
            abstained += 1
            continue
        out = set(out)
        sizes.append(len(out))
        covered += ref in out
    n = len(records)
    return SetMetrics(
        covered / n,
        float(np.mean(sizes)) if sizes else 0.0,
        abstained / n,
    )


# --- brute-force reference ---------------------------------------------------

ORACLE_LIMITS = {"actions": 5, "states": 4, "vertices": 8, "members": 4}
_TOL = 1e-9


class OracleBoundsError(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    maximal: tuple[str, ...]
    e_admissible: tuple[str, ...]
    gamma_maximin: tuple[str, ...]
    feasible: tuple[str, ...]
    safe: tuple[str, ...]
    undominated: tuple[str, ...]
    classes: tuple[tuple[str, ...], ...]
    recommendation: str
    recommended: tuple[str, ...]
    info_action: str | None


def _oracle_eu(problem: DecisionProblem, verts: Sequence[int]) -> list[list[list[float]]]:
    out = []
    for v in verts:
        b = [float(x) for x in problem.credal.vertices[v].probabilities]
        row = []
        for m in problem.preferences.members:
            tab = m.table.tolist()
            row.append([sum(p * u for p, u in zip(b, tab[a])) for a in range(len(tab))])
        out.append(row)
    return out


def _oracle_dominates(eu, i: int, j: int, eps: float) -> bool:
    diffs = [em[i] - em[j] for ev in eu for em in ev]
    if any(d < -_TOL for d in diffs):
        return False
    top = max(diffs)
    return top > _TOL and top >= eps - _TOL


def _oracle_maximal(eu, cand: list[int], eps: float) -> list[int]:
    return [j for j in cand if not any(_oracle_dominates(eu, i, j, eps) for i in cand if i != j)]


def oracle_admissible(problem: DecisionProblem) -> OracleResult:
    """Recompute every decision-layer quantity by plain enumeration.

    Shares no computation with the dominance, criteria or pipeline modules;
    it reads only the raw fields of ``problem``.
    """
    ids = list(problem.actions.ids)
    sizes = {
        "actions": len(ids),
        "states": len(problem.states.ids),
        "vertices": len(problem.credal.vertices),
        "members": len(problem.preferences.members),
    }
    for k, lim in ORACLE_LIMITS.items():
        if sizes[k] > lim:
            raise OracleBoundsError(f"{sizes[k]} {k} exceeds oracle limit {lim}")
    n_a = len(ids)
    all_v = list(range(sizes["vertices"]))
    eu = _oracle_eu(problem, all_v)
    pairs = [em for ev in eu for em in ev]

    everyone = list(range(n_a))
    maximal = _oracle_maximal(eu, everyone, 0.0)
    e_adm = set()
    for em in pairs:
        best = max(em)
        e_adm.update(a for a in everyone if em[a] >= best - _TOL)
    # a tied optimum that is weakly dominated is optimal only alongside its dominator
    e_adm &= set(maximal)
    worst = [min(em[a] for em in pairs) for a in everyone]
    gm = [a for a in everyone if worst[a] >= max(worst) - _TOL]

    # staged pipeline
    feasible = [a for a in everyone if all(flags[ids[a]] for flags in problem.constraints.values())]
    name = lambda xs: tuple(ids[a] for a in xs)
    if not feasible:
        return OracleResult(name(maximal), name(sorted(e_adm)), name(gm), (), (), (), (),
                            "present_set", (), None)
    safe = list(feasible)
    if problem.safety_grades is not None:
        rank = {g: k for k, g in enumerate(problem.safety_scale)}
        grades = [rank[problem.safety_grades[ids[a]]] for a in feasible]
        safe = [a for a, g in zip(feasible, grades) if g == min(grades)]
    eps = problem.epsilon
    und = _oracle_maximal(eu, safe, eps)

    # components of the within-epsilon graph, by repeated merging
    groups = [{a} for a in und]
    merged = True
    while merged:
        merged = False
        for x in range(len(groups)):
            for y in range(x + 1, len(groups)):
                if any(
                    all(abs(em[i] - em[j]) <= eps + _TOL for em in pairs)
                    for i in groups[x] for j in groups[y]
                ):
                    groups[x] |= groups.pop(y)
                    merged = True
                    break
            if merged:
                break
    classes = sorted((sorted(g) for g in groups), key=lambda g: g[0])

    def result(kind, rec, info=None):
        return OracleResult(name(maximal), name(sorted(e_adm)), name(gm), name(feasible),
                            name(safe), name(und), tuple(name(c) for c in classes),
                            kind, name(rec), info)

    if len(und) == 1:
        return result("act", und)
    if len(classes) == 1 and problem.tie_break:
        cls = classes[0]
        chosen = cls
        if problem.tie_break == "gamma_maximin":
            w = {a: min(em[a] for em in pairs) for a in cls}
            chosen = [a for a in cls if w[a] >= max(w.values()) - _TOL]
        elif problem.tie_break == "minimax_regret" and len(problem.preferences.members) == 1:
            tab = problem.preferences.members[0].table.tolist()
            n_s = len(tab[0])
            top = [max(tab[a][s] for a in cls) for s in range(n_s)]
            mr = {a: max(top[s] - tab[a][s] for s in range(n_s)) for a in cls}
            chosen = [a for a in cls if mr[a] <= min(mr.values()) + _TOL]
        if len(chosen) == 1:
            return result("act", chosen)

    best_u, best_val = None, None
    for u in problem.info_actions:
        val = 0.0
        for f, keep in enumerate(u.retained):
            p = sum(float(x) for x in u.likelihood[f]) / len(all_v)
            if p <= 0:
                continue
            sub = _oracle_eu(problem, list(keep))
            val += p * (len(und) - len(_oracle_maximal(sub, und, eps)))
        val = problem.voi_weight * val - u.cost
        if best_val is None or val > best_val:
            best_u, best_val = u.id, val
    if best_val is not None and best_val > _TOL:
        return result("request_info", und, best_u)
    return result("present_set", und)
