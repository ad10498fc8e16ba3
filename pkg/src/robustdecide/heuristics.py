"""Non-compensatory rules: screens, lexicographic choice, elimination by
aspects, Take-The-Best, fast-and-frugal trees, and the sequential-test
machinery (naive-Bayes log-likelihood sums and SPRT) they approximate.

Cue convention for binary cues: a value of 1 favours the option holding it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

A_PREFERRED = "a_preferred"
B_PREFERRED = "b_preferred"
TIE = "tie"
NO_DECISION = "no_decision"
ABSTAIN = "abstain"


def _check_permutation(order: Sequence[int], m: int) -> list[int]:
    order = [int(i) for i in order]
    if sorted(order) != list(range(m)):
        raise ValueError(f"order {order} is not a permutation of range({m})")
    return order


def conjunctive_screen(profile: Sequence[float], thresholds: Sequence[float]) -> bool:
    """Accept iff every cue meets its minimum."""
    if len(profile) != len(thresholds):
        raise ValueError("profile and thresholds differ in length")
    return all(x >= t for x, t in zip(profile, thresholds))


def disjunctive_screen(profile: Sequence[float], thresholds: Sequence[float]) -> bool:
    """Accept iff at least one cue meets its minimum."""
    if len(profile) != len(thresholds):
        raise ValueError("profile and thresholds differ in length")
    return any(x >= t for x, t in zip(profile, thresholds))


def lexicographic_compare(
    profile_a: Sequence[float], profile_b: Sequence[float], priority_order: Sequence[int]
) -> tuple[str, int | None]:
    """Decide on the first attribute in priority order where the profiles
    differ; higher values win. Returns the verdict and that attribute."""
    if len(profile_a) != len(profile_b):
        raise ValueError("profiles differ in length")
    for j in _check_permutation(priority_order, len(profile_a)):
        if profile_a[j] > profile_b[j]:
            return A_PREFERRED, j
        if profile_b[j] > profile_a[j]:
            return B_PREFERRED, j
    return TIE, None


def eba_choose(
    alternatives: Sequence[Sequence[bool]], aspect_order: Sequence[int]
) -> list[int]:
    """Elimination by aspects with a fixed aspect order.

    ``alternatives[i][j]`` says whether alternative ``i`` has aspect ``j``.
    Aspects are applied in order until one alternative remains; an aspect
    that no remaining alternative has is skipped. Returns surviving indices.
    """
    if len(alternatives) == 0:
        raise ValueError("no alternatives to choose from")
    remaining = list(range(len(alternatives)))
    for j in aspect_order:
        if len(remaining) == 1:
            break
        kept = [i for i in remaining if alternatives[i][j]]
        if kept:
            remaining = kept
    return remaining


def ttb_decide(
    profile_a: Sequence[int], profile_b: Sequence[int], validity_order: Sequence[int]
) -> tuple[str, int | None]:
    """Take-The-Best on two binary profiles.

    Returns ``("a" | "b" | "no_decision", stop cue)``; cues after the stop
    cue are never read.
    """
    if len(profile_a) != len(profile_b):
        raise ValueError("profiles differ in length")
    for j in _check_permutation(validity_order, len(profile_a)):
        if profile_a[j] != profile_b[j]:
            return ("a" if profile_a[j] else "b"), j
    return NO_DECISION, None


# --- fast-and-frugal trees -------------------------------------------------

_COMPARE = {
    ">": lambda x, t: x > t,
    ">=": lambda x, t: x >= t,
    "<": lambda x, t: x < t,
    "<=": lambda x, t: x <= t,
}


@dataclass(frozen=True)
class FFTNode:
    """One tree level: ``cue <direction> threshold`` is the positive branch.

    ``exit_side`` says which branch leaves the tree with ``exit_action``.
    The final level exits both ways; its other branch yields
    ``other_action``.
    """

    cue: int
    threshold: float
    exit_side: str
    exit_action: object
    direction: str = ">"
    other_action: object = None

    def __post_init__(self):
        if self.direction not in _COMPARE:
            raise ValueError(f"unknown comparison {self.direction!r}")
        if self.exit_side not in ("positive", "negative"):
            raise ValueError("exit_side must be 'positive' or 'negative'")

    def positive(self, x: float) -> bool:
        return _COMPARE[self.direction](x, self.threshold)

    def interval_side(self, lo: float, hi: float) -> str | None:
        """'positive'/'negative' if the whole interval lies on one branch,
        else None."""
        pos_lo, pos_hi = self.positive(lo), self.positive(hi)
        if pos_lo and pos_hi:
            return "positive"
        if not pos_lo and not pos_hi:
            return "negative"
        return None


@dataclass(frozen=True)
class FrugalTree:
    levels: tuple[FFTNode, ...]
    cue_names: tuple[str, ...] = ()
    degenerate: bool = False

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        object.__setattr__(self, "cue_names", tuple(self.cue_names))
        if not self.levels:
            raise ValueError("a frugal tree needs at least one level")
        if self.levels[-1].other_action is None:
            raise ValueError("the final level must exit on both branches")

    @property
    def depth(self) -> int:
        return len(self.levels)

    def describe(self) -> str:
        lines = []
        for k, node in enumerate(self.levels, 1):
            name = self.cue_names[node.cue] if self.cue_names else f"cue{node.cue}"
            cond = f"{name} {node.direction} {node.threshold:g}"
            if k < self.depth:
                lines.append(f"level {k}: if {cond} is {node.exit_side == 'positive'} -> exit {node.exit_action}")
            else:
                pos, neg = _final_actions(node)
                lines.append(f"level {k}: if {cond} -> {pos} else -> {neg}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "cue_names": list(self.cue_names),
            "degenerate": self.degenerate,
            "levels": [
                {
                    "cue": n.cue,
                    "direction": n.direction,
                    "threshold": n.threshold,
                    "exit_side": n.exit_side,
                    "exit_action": n.exit_action,
                    "other_action": n.other_action,
                }
                for n in self.levels
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FrugalTree":
        return cls(
            tuple(FFTNode(**n) for n in d["levels"]),
            tuple(d.get("cue_names", ())),
            bool(d.get("degenerate", False)),
        )


def _final_actions(node: FFTNode) -> tuple[object, object]:
    # (action on positive branch, action on negative branch)
    if node.exit_side == "positive":
        return node.exit_action, node.other_action
    return node.other_action, node.exit_action


def fft_decide(tree: FrugalTree, profile: Sequence[float]) -> tuple[object, int]:
    """Walk the tree; return the action and the 1-based exit level."""
    for k, node in enumerate(tree.levels, 1):
        if node.cue >= len(profile) or profile[node.cue] is None:
            raise ValueError(f"profile has no value for cue {node.cue}")
        side = "positive" if node.positive(profile[node.cue]) else "negative"
        if k == tree.depth:
            pos, neg = _final_actions(node)
            return (pos if side == "positive" else neg), k
        if side == node.exit_side:
            return node.exit_action, k
    raise AssertionError("unreachable")


def fft_decide_interval(
    tree: FrugalTree, profile: Sequence, abstain_policy: str = "abstain"
) -> tuple[object, int]:
    """Tree walk with interval-valued cues.

    A level exits only when the whole interval lies on the exit branch; a
    straddling interval passes to the next level. Straddling at the final
    level returns ``"abstain"``; ``abstain_policy="other"`` instead takes the
    final level's non-exit branch.
    """
    if abstain_policy not in ("abstain", "other"):
        raise ValueError(f"unknown abstain policy {abstain_policy!r}")
    for k, node in enumerate(tree.levels, 1):
        if node.cue >= len(profile) or profile[node.cue] is None:
            raise ValueError(f"profile has no value for cue {node.cue}")
        reading = profile[node.cue]
        lo, hi = (reading, reading) if np.isscalar(reading) else reading
        if lo > hi:
            raise ValueError(f"interval for cue {node.cue} has lower > upper")
        side = node.interval_side(lo, hi)
        if k == tree.depth:
            pos, neg = _final_actions(node)
            if side is None:
                return (ABSTAIN if abstain_policy == "abstain" else node.other_action), k
            return (pos if side == "positive" else neg), k
        if side == node.exit_side:
            return node.exit_action, k
    raise AssertionError("unreachable")


# --- learning ---------------------------------------------------------------


@dataclass(frozen=True)
class CueDataset:
    X: NDArray[np.float64]
    y: NDArray[np.int_]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, float))
        y = np.asarray(self.y).astype(int).ravel()
        if X.shape[0] != y.size:
            raise ValueError("rows and labels differ in count")
        if not np.isin(y, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        names = tuple(self.names) or tuple(f"cue{j}" for j in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise ValueError("one name per cue column required")
        object.__setattr__(self, "names", names)


def _cue_thresholds(X: NDArray) -> NDArray:
    thr = np.empty(X.shape[1])
    for j in range(X.shape[1]):
        col = X[:, j]
        if np.isin(col, (0.0, 1.0)).all():
            thr[j] = 0.5
        else:
            thr[j] = float(np.median(col))
    return thr


def _exit_choice(pos: NDArray[np.bool_], y: NDArray) -> tuple[float, str, int]:
    """Best single exit for one cue on the given rows.

    Returns (validity, side, action). Validity is the share of rows on the
    exit branch carrying its majority label; ties go to the positive side.
    """
    best = (-1.0, "positive", 1)
    for side, mask in (("positive", pos), ("negative", ~pos)):
        n = mask.sum()
        if n == 0:
            continue
        ones = y[mask].sum()
        label = 1 if ones * 2 > n else 0 if ones * 2 < n else (1 if side == "positive" else 0)
        v = max(ones, n - ones) / n
        if v > best[0]:
            best = (v, side, label)
    return best


def _accuracy_score(pos: NDArray[np.bool_], y: NDArray) -> float:
    # single-cue classifier accuracy, taking whichever polarity is better
    acc = float((pos == (y == 1)).mean())
    return max(acc, 1.0 - acc)


def _majority(y: NDArray, default: int) -> int:
    if y.size == 0:
        return default
    ones = int(y.sum())
    return 1 if 2 * ones > y.size else 0 if 2 * ones < y.size else default


def fft_learn(
    dataset: CueDataset,
    max_depth: int = 3,
    ordering: str = "validity",
    conditional: bool = False,
) -> FrugalTree:
    """Grow a fast-and-frugal tree.

    Cues are ranked once on the full data (or re-ranked on the rows still in
    play when ``conditional`` is set) by ``validity`` (purity of the cue's
    best exit branch) or ``accuracy`` (single-cue classification accuracy).
    Binary cues split at 0.5, real cues at their median. Each level exits on
    its purer branch with that branch's majority label. Growth stops early
    once the remaining rows are pure. Ties between cues go to the lowest
    column index.
    """
    if ordering not in ("validity", "accuracy"):
        raise ValueError("ordering must be 'validity' or 'accuracy'")
    if max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    X, y = dataset.X, dataset.y
    if X.shape[0] == 0:
        raise ValueError("dataset is empty")
    thr = _cue_thresholds(X)

    if np.unique(y).size == 1:
        c = int(y[0])
        node = FFTNode(0, float(thr[0]), "positive", c, ">", c)
        return FrugalTree((node,), dataset.names, degenerate=True)

    def rank(rows: NDArray[np.bool_], cues: list[int]) -> list[int]:
        scores = []
        for j in cues:
            pos = X[rows, j] > thr[j]
            if ordering == "validity":
                s = _exit_choice(pos, y[rows])[0]
            else:
                s = _accuracy_score(pos, y[rows])
            scores.append(s)
        # stable sort keeps the lowest column first among equal scores
        return [cues[i] for i in sorted(range(len(cues)), key=lambda i: -scores[i])]

    rows = np.ones(y.size, dtype=bool)
    unused = list(range(X.shape[1]))
    order = rank(rows, unused)
    levels: list[FFTNode] = []
    overall = _majority(y, 1)
    while True:
        if conditional and levels:
            order = rank(rows, unused)
        j = order.pop(0) if not conditional else order[0]
        unused.remove(j)
        pos = X[:, j] > thr[j]
        yr, pr = y[rows], pos[rows]
        last = len(levels) + 1 == max_depth or not unused
        _, side, label = _exit_choice(pr, yr)
        stay = rows & (~pos if side == "positive" else pos)
        if not last and np.unique(y[stay]).size <= 1:
            last = True
        if last:
            pos_label = _majority(yr[pr], _majority(yr, overall))
            neg_label = _majority(yr[~pr], _majority(yr, overall))
            if side == "positive":
                levels.append(FFTNode(j, float(thr[j]), "positive", pos_label, ">", neg_label))
            else:
                levels.append(FFTNode(j, float(thr[j]), "negative", neg_label, ">", pos_label))
            break
        levels.append(FFTNode(j, float(thr[j]), side, label, ">"))
        rows = stay
    return FrugalTree(tuple(levels), dataset.names)


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def accuracy(self) -> float:
        n = self.tp + self.fp + self.tn + self.fn
        return (self.tp + self.tn) / n if n else float("nan")

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn,
                "accuracy": self.accuracy}


def fft_predict(tree: FrugalTree, X: NDArray) -> NDArray:
    return np.array([fft_decide(tree, row)[0] for row in np.atleast_2d(X)])


def fft_confusion(tree: FrugalTree, dataset: CueDataset) -> Confusion:
    pred = fft_predict(tree, dataset.X).astype(int)
    y = dataset.y
    return Confusion(
        tp=int(((pred == 1) & (y == 1)).sum()),
        fp=int(((pred == 1) & (y == 0)).sum()),
        tn=int(((pred == 0) & (y == 0)).sum()),
        fn=int(((pred == 0) & (y == 1)).sum()),
    )


# --- sequential tests -------------------------------------------------------


@dataclass(frozen=True)
class LLRModel:
    """Naive-Bayes cue model: ``llr[j, c]`` is the log-likelihood ratio of
    hypothesis 1 versus 0 for cue ``j`` taking value ``c``."""

    llr: NDArray[np.float64]
    prior_log_odds: float = 0.0
    threshold: float = 0.0

    def __post_init__(self):
        llr = np.asarray(self.llr, float)
        if llr.ndim != 2 or llr.shape[1] != 2:
            raise ValueError("llr must have shape (n_cues, 2)")
        if not np.all(np.isfinite(llr)):
            raise ValueError("llr values must be finite")
        object.__setattr__(self, "llr", llr)

    @classmethod
    def from_present_weights(cls, weights: Sequence[float], **kw) -> "LLRModel":
        """Cues that are silent when absent (``llr[j, 0] = 0``)."""
        w = np.asarray(weights, float)
        return cls(np.column_stack([np.zeros_like(w), w]), **kw)

    @property
    def n_cues(self) -> int:
        return self.llr.shape[0]

    def weights(self) -> NDArray[np.float64]:
        """Change in the log-odds when a cue flips from 0 to 1."""
        return self.llr[:, 1] - self.llr[:, 0]

    def validity_order(self) -> list[int]:
        return sorted(range(self.n_cues), key=lambda j: -abs(self.weights()[j]))


def llr_sum(model: LLRModel, profile: Sequence[int]) -> tuple[float, int]:
    """Posterior log-odds and the decision (1 iff log-odds exceed threshold)."""
    c = np.asarray(profile, dtype=int)
    if c.size != model.n_cues:
        raise ValueError("profile length does not match the model")
    total = model.prior_log_odds + float(model.llr[np.arange(c.size), c].sum())
    return total, int(total > model.threshold)


H1, H0, UNDECIDED = "H1", "H0", "undecided"


def sprt_run(
    llr_sequence: Sequence[float],
    upper: float,
    lower: float,
    truncation_threshold: float | None = None,
) -> tuple[str, int]:
    """Wald's sequential test on a stream of log-likelihood ratio increments.

    Stops at the first index (1-based) where the running sum reaches
    ``upper`` (H1) or ``lower`` (H0). If the stream ends first the verdict is
    "undecided", unless ``truncation_threshold`` is given, in which case the
    final sum is compared against it (H1 iff strictly above).
    """
    if not upper > lower:
        raise ValueError("upper boundary must exceed lower boundary")
    s, k = 0.0, 0
    for k, inc in enumerate(llr_sequence, 1):
        s += inc
        if s >= upper:
            return H1, k
        if s <= lower:
            return H0, k
    if truncation_threshold is None:
        return UNDECIDED, k
    return (H1 if s > truncation_threshold else H0), k


def fft_from_sprt(
    contributions: NDArray,
    upper: float,
    lower: float,
    truncation_threshold: float = 0.0,
) -> FrugalTree:
    """Derive the frugal tree that reproduces a truncated SPRT.

    ``contributions[k] = (llr if cue k is 0, llr if cue k is 1)``. Along the
    tree's continuation path the running sum is fixed, so each level is an
    exit exactly when one cue value crosses a boundary. Raises ValueError if
    some level has no crossing (no tree of that depth exists); a level where
    both values cross becomes the final level.
    """
    C = np.asarray(contributions, float)
    d = C.shape[0]
    s = 0.0
    levels: list[FFTNode] = []
    for k in range(d):
        outcome = []
        for c in (0, 1):
            t = s + C[k, c]
            outcome.append(H1 if t >= upper else H0 if t <= lower else None)
        final = k == d - 1
        if final:
            for c in (0, 1):
                if outcome[c] is None:
                    t = s + C[k, c]
                    outcome[c] = H1 if t > truncation_threshold else H0
        if outcome[0] is not None and outcome[1] is not None:
            levels.append(FFTNode(k, 0.5, "positive", outcome[1], ">", outcome[0]))
            break
        if outcome[0] is None and outcome[1] is None:
            raise ValueError(f"no boundary crossing at level {k + 1}; not tree-shaped")
        c_exit = 0 if outcome[0] is not None else 1
        side = "positive" if c_exit == 1 else "negative"
        levels.append(FFTNode(k, 0.5, side, outcome[c_exit], ">"))
        s += C[k, 1 - c_exit]
    return FrugalTree(tuple(levels))


@dataclass(frozen=True)
class TTBCheck:
    matches: bool
    counterexample: tuple[tuple[int, ...], tuple[int, ...]] | None = None
    patterns_checked: int = 0


MAX_ENUMERATION_CUES = 20


def ttb_matches_llr(
    model: LLRModel, validity_order: Sequence[int] | None = None, chunk: int = 200_000
) -> TTBCheck:
    """Exhaustively compare pairwise Take-The-Best with the sign of the
    log-likelihood difference.

    Every pair of binary profiles is covered by enumerating each cue as one
    of agree / first-has-it / second-has-it; pairs that agree on a cue
    contribute nothing to either rule, so this is equivalent to all ``4**m``
    pairs. Whenever TTB decides, the profile it picks must have the strictly
    larger log-likelihood sum. The first mismatch found is returned.
    """
    m = model.n_cues
    if m > MAX_ENUMERATION_CUES:
        raise ValueError(f"refusing to enumerate {m} cues (limit {MAX_ENUMERATION_CUES})")
    order = list(model.validity_order() if validity_order is None else validity_order)
    order = _check_permutation(order, m)
    w = model.weights()[order]
    checked = 0
    patterns = itertools.product((0, 1, -1), repeat=m)
    while True:
        block = np.array(list(itertools.islice(patterns, chunk)), dtype=np.int8)
        if block.size == 0:
            break
        block = block.reshape(-1, m)
        checked += block.shape[0]
        # a cue discriminates for TTB when the profiles differ there and the
        # cue carries weight; its vote is the sign of the weighted difference
        votes = block * np.sign(w)[None, :]
        active = votes != 0
        has = active.any(axis=1)
        first = np.argmax(active, axis=1)
        ttb = np.where(has, votes[np.arange(len(block)), first], 0)
        diff = block @ w
        bad = has & (np.sign(diff) != ttb)
        if bad.any():
            t = block[np.flatnonzero(bad)[0]]
            a = [0] * m
            b = [0] * m
            for pos, j in enumerate(order):
                if t[pos] == 1:
                    a[j] = 1
                elif t[pos] == -1:
                    b[j] = 1
            return TTBCheck(False, (tuple(a), tuple(b)), checked)
    return TTBCheck(True, None, checked)
