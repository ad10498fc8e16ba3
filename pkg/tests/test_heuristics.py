import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robustdecide.heuristics import (
    ABSTAIN,
    A_PREFERRED,
    B_PREFERRED,
    H0,
    H1,
    NO_DECISION,
    TIE,
    UNDECIDED,
    CueDataset,
    FFTNode,
    FrugalTree,
    LLRModel,
    conjunctive_screen,
    disjunctive_screen,
    eba_choose,
    fft_confusion,
    fft_decide,
    fft_decide_interval,
    fft_from_sprt,
    fft_learn,
    lexicographic_compare,
    llr_sum,
    sprt_run,
    ttb_decide,
    ttb_matches_llr,
)

seeds = st.integers(0, 2**32 - 1)


def random_tree(rng, n_cues=5, max_depth=4):
    depth = int(rng.integers(1, min(max_depth, n_cues) + 1))
    cues = rng.permutation(n_cues)[:depth]
    levels = []
    for k, c in enumerate(cues):
        side = str(rng.choice(["positive", "negative"]))
        other = int(rng.integers(2)) if k == depth - 1 else None
        levels.append(FFTNode(int(c), round(float(rng.normal()), 1), side,
                              int(rng.integers(2)), str(rng.choice([">", ">=", "<", "<="])), other))
    return FrugalTree(tuple(levels))


def mismatch_exists(w):
    # closed form: lexicographic and additive rules disagree somewhere iff some
    # weight in validity order is matched by the sum of the ones below it
    a = sorted((abs(x) for x in w if x != 0), reverse=True)
    return any(a[k] <= sum(a[k + 1:]) for k in range(len(a) - 1))


# --- screens and lexicographic rules -----------------------------------------------

def test_screens():
    assert conjunctive_screen([1, 2], [1, 2])
    assert not conjunctive_screen([1, 1.9], [1, 2])
    assert conjunctive_screen([], [])
    assert disjunctive_screen([0, 3], [1, 2])
    assert not disjunctive_screen([0, 1], [1, 2])
    assert not disjunctive_screen([], [])
    with pytest.raises(ValueError):
        conjunctive_screen([1], [1, 2])


def test_lexicographic_compare():
    assert lexicographic_compare((1, 2), (1, 2), (0, 1)) == (TIE, None)
    assert lexicographic_compare((2, 0, 0), (1, 9, 9), (0, 1, 2)) == (A_PREFERRED, 0)
    assert lexicographic_compare((1, 0, 0), (1, 1, 1), (0, 1, 2)) == (B_PREFERRED, 1)
    with pytest.raises(ValueError):
        lexicographic_compare((1, 2), (1, 2), (0, 0))


def test_eba():
    assert eba_choose([[1, 1], [0, 1], [1, 0]], [0, 1]) == [0]
    # no alternative has aspect 2, so it is skipped
    assert eba_choose([[1, 0, 0], [1, 1, 0]], [2, 0]) == [0, 1]
    assert eba_choose([[1, 0], [1, 1], [0, 1]], [0, 1]) == [1]
    with pytest.raises(ValueError):
        eba_choose([], [0])


def test_ttb_decide():
    assert ttb_decide((1, 0, 1), (1, 0, 1), (0, 1, 2)) == (NO_DECISION, None)
    assert ttb_decide((1, 0, 0), (0, 1, 1), (0, 1, 2)) == ("a", 0)
    assert ttb_decide((1, 1, 0), (1, 1, 1), (0, 1, 2)) == ("b", 2)
    with pytest.raises(ValueError):
        ttb_decide((1, 0), (0, 1), (0, 2))


# --- fast-and-frugal trees ----------------------------------------------------

TREE = FrugalTree((
    FFTNode(0, 0.5, "positive", "treat"),
    FFTNode(1, 0.5, "negative", "home", ">", "admit"),
))


def test_fft_decide():
    assert fft_decide(TREE, [1, None]) == ("treat", 1)
    assert fft_decide(TREE, [0, 1]) == ("admit", 2)
    assert fft_decide(TREE, [0, 0]) == ("home", 2)
    with pytest.raises(ValueError):
        fft_decide(TREE, [0, None])
    with pytest.raises(ValueError):
        FrugalTree((FFTNode(0, 0.5, "positive", 1),))


def test_fft_interval():
    assert fft_decide_interval(TREE, [(0.2, 0.9), (0.6, 0.8)]) == ("admit", 2)
    assert fft_decide_interval(TREE, [(0.2, 0.9), (0.2, 0.9)]) == (ABSTAIN, 2)
    assert fft_decide_interval(TREE, [(0.2, 0.9), (0.2, 0.9)], "other") == ("admit", 2)
    assert fft_decide_interval(TREE, [(0.7, 0.9), (0.2, 0.9)]) == ("treat", 1)
    with pytest.raises(ValueError):
        fft_decide_interval(TREE, [(0.9, 0.2), 0])


def test_tree_round_trip():
    t = FrugalTree(TREE.levels, ("fever", "rash"))
    assert FrugalTree.from_dict(t.to_dict()) == t
    assert "fever > 0.5" in t.describe()


@settings(max_examples=300)
@given(seeds)
def test_interval_reduces_to_point(seed):
    rng = np.random.default_rng(seed)
    tree = random_tree(rng)
    x = rng.normal(size=5).round(1)
    assert fft_decide_interval(tree, [(v, v) for v in x]) == fft_decide(tree, x)


@settings(max_examples=300)
@given(seeds)
def test_fft_non_compensation(seed):
    rng = np.random.default_rng(seed)
    tree = random_tree(rng)
    x = rng.normal(size=5)
    action, level = fft_decide(tree, x)
    read = {n.cue for n in tree.levels[:level]}
    y = x.copy()
    for j in range(5):
        if j not in read:
            y[j] = rng.normal() * 100
    assert fft_decide(tree, y) == (action, level)


@settings(max_examples=300)
@given(seeds)
def test_ttb_non_compensation(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 8))
    a, b = rng.integers(0, 2, m), rng.integers(0, 2, m)
    order = rng.permutation(m)
    verdict, stop = ttb_decide(a, b, order)
    if stop is None:
        return
    later = order[list(order).index(stop) + 1:]
    a2, b2 = a.copy(), b.copy()
    a2[later] = rng.integers(0, 2, later.size)
    b2[later] = rng.integers(0, 2, later.size)
    assert ttb_decide(a2, b2, order) == (verdict, stop)


# --- learning -----------------------------------------------------------------------

def test_learn_separable():
    rng = np.random.default_rng(1)
    y = rng.integers(0, 2, 200)
    X = np.column_stack([rng.integers(0, 2, 200), y, rng.normal(size=200)])
    tree = fft_learn(CueDataset(X, y))
    assert tree.depth == 1 and tree.levels[0].cue == 1
    assert fft_confusion(tree, CueDataset(X, y)).accuracy == 1.0


def test_learn_noise_labels():
    rng = np.random.default_rng(2)
    n = 4000
    X = rng.integers(0, 2, (n, 3))
    y = (rng.random(n) < 0.7).astype(int)
    acc = fft_confusion(fft_learn(CueDataset(X, y)), CueDataset(X, y)).accuracy
    base = max(y.mean(), 1 - y.mean())
    assert abs(acc - base) < 3 * np.sqrt(base * (1 - base) / n) + 0.01


def test_learn_duplicate_columns_take_lowest():
    rng = np.random.default_rng(3)
    y = rng.integers(0, 2, 100)
    noisy = np.where(rng.random(100) < 0.1, 1 - y, y)
    X = np.column_stack([rng.integers(0, 2, 100), noisy, noisy])
    for ordering in ("validity", "accuracy"):
        assert fft_learn(CueDataset(X, y), ordering=ordering).levels[0].cue == 1


def test_learn_single_class_degenerate():
    tree = fft_learn(CueDataset(np.eye(3), [1, 1, 1]))
    assert tree.degenerate and tree.depth == 1
    assert {fft_decide(tree, r)[0] for r in np.eye(3)} == {1}


def test_learn_respects_depth_and_conditional():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(300, 6))
    y = (X[:, 0] + X[:, 1] + 0.5 * rng.normal(size=300) > 0).astype(int)
    for cond in (False, True):
        t = fft_learn(CueDataset(X, y), max_depth=3, conditional=cond)
        assert 1 <= t.depth <= 3
        assert len({n.cue for n in t.levels}) == t.depth
        assert fft_confusion(t, CueDataset(X, y)).accuracy > 0.6
    with pytest.raises(ValueError):
        fft_learn(CueDataset(X, y), ordering="gini")


# --- log-likelihood sums and SPRT -----------------------------------------------------

def test_llr_sum():
    m = LLRModel.from_present_weights([1.2, -0.3, 1.5])
    total, d = llr_sum(m, [1, 1, 1])
    assert total == pytest.approx(2.4) and d == 1
    flat = LLRModel(np.zeros((3, 2)), prior_log_odds=0.4, threshold=0.5)
    assert llr_sum(flat, [1, 0, 1]) == (pytest.approx(0.4), 0)
    with pytest.raises(ValueError):
        llr_sum(m, [1, 0])


def test_sprt_examples():
    assert sprt_run([1.2, -0.3, 1.5], 2, -2) == (H1, 3)
    assert sprt_run([2.5, -9], 2, -2) == (H1, 1)
    assert sprt_run([0, 0, 0], 2, -2) == (UNDECIDED, 3)
    assert sprt_run([0.5, -0.1], 2, -2, truncation_threshold=0) == (H1, 2)
    with pytest.raises(ValueError):
        sprt_run([1], -1, 1)


def check_sprt_tree(C, upper, lower, thr=0.0):
    tree = fft_from_sprt(C, upper, lower, thr)
    d = C.shape[0]
    for bits in itertools.product((0, 1), repeat=d):
        seq = [C[k, b] for k, b in enumerate(bits)]
        want, _ = sprt_run(seq, upper, lower, truncation_threshold=thr)
        got, _ = fft_decide(tree, bits)
        if got != want:
            return False
    return True


def test_sprt_tree_agrees():
    C = np.array([[-2.5, 0.5], [-0.3, 2.0], [-1.0, 1.0]])
    assert check_sprt_tree(C, 2.0, -2.0)


def test_sprt_tree_refuses_non_tree_shapes():
    with pytest.raises(ValueError):
        fft_from_sprt(np.array([[-0.1, 0.1], [-0.1, 0.1]]), 2.0, -2.0)


# --- lexicographic versus additive ------------------------------------------------------

def test_ttb_llr_examples():
    assert ttb_matches_llr(LLRModel.from_present_weights([8, 4, 2, 1])).matches
    res = ttb_matches_llr(LLRModel.from_present_weights([1.0, -1.0]))
    assert not res.matches and res.counterexample is not None
    assert ttb_matches_llr(LLRModel.from_present_weights([0.7])).matches
    with pytest.raises(ValueError):
        ttb_matches_llr(LLRModel.from_present_weights(np.ones(21)))


def test_ttb_counterexample_is_real():
    m = LLRModel.from_present_weights([3.0, 2.0, 2.0])
    res = ttb_matches_llr(m)
    a, b = res.counterexample
    verdict, _ = ttb_decide(a, b, m.validity_order())
    la, lb = llr_sum(m, a)[0], llr_sum(m, b)[0]
    assert verdict != NO_DECISION
    assert not ((verdict == "a" and la > lb) or (verdict == "b" and lb > la))


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(-6, 6), min_size=1, max_size=7))
def test_ttb_llr_matches_closed_form(w):
    res = ttb_matches_llr(LLRModel.from_present_weights([float(x) for x in w]))
    assert res.matches == (not mismatch_exists(w))
