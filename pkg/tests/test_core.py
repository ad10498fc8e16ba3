import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robustdecide.core import (
    Belief,
    CredalSet,
    PreferenceSet,
    UtilityModel,
    eu_bounds,
    expected_utility,
    make_problem,
    score_first_choice,
    validate_problem,
)
from robustdecide.core import ActionSet

from conftest import random_problem


def test_well_formed_problem_passes():
    p = make_problem([[1, 0], [0, 1]], [0.5, 0.5])
    assert validate_problem(p).ok


def test_unnormalized_belief_reported():
    p = make_problem([[1, 0], [0, 1]], [0.6, 0.6])
    rep = validate_problem(p)
    assert not rep.ok
    assert any("not normalized" in v for v in rep.violations)


def test_missing_utility_cell_reported():
    p = make_problem([[1, np.nan], [0, 1]], [0.5, 0.5])
    assert any("incomplete utility table" in v for v in validate_problem(p).violations)


def test_duplicate_ids_and_bad_constraints_reported():
    p = make_problem([[1, 0], [0, 1]], [0.5, 0.5], action_ids=["a", "a"],
                     constraints={"c": {"a": True}}, epsilon=-1.0)
    v = " | ".join(validate_problem(p).violations)
    assert "duplicate action identifiers" in v
    assert "epsilon" in v


def test_negative_belief_reported():
    p = make_problem([[1, 0]], [1.5, -0.5])
    assert not validate_problem(p).ok


@pytest.mark.parametrize("row, belief, expected", [
    ((1, 0), (0.5, 0.5), 0.5),
    ((3.25, 3.25), (0.9, 0.1), 3.25),
    ((10, 0, 7), (0.2, 0.3, 0.5), 5.5),  # 10*0.2 + 0*0.3 + 7*0.5
])
def test_expected_utility_examples(row, belief, expected):
    assert expected_utility(0, Belief(belief), UtilityModel([row])) == pytest.approx(expected, abs=1e-12)


def test_eu_bounds_examples():
    u = UtilityModel([[1.0, 0.0]])
    single = eu_bounds(0, CredalSet((Belief([0.3, 0.7]),)), PreferenceSet((u,)))
    assert single == pytest.approx((0.3, 0.3))
    two = eu_bounds(0, CredalSet((Belief([0.4, 0.6]), Belief([0.6, 0.4]))), PreferenceSet((u,)))
    assert two == pytest.approx((0.4, 0.6))
    const = eu_bounds(0, CredalSet((Belief([0.1, 0.9]), Belief([1, 0]))),
                      PreferenceSet((UtilityModel([[2.0, 2.0]]),)))
    assert const == pytest.approx((2.0, 2.0))


def test_eu_tensor_matches_direct_sum(rng):
    for _ in range(50):
        p = random_problem(rng, extras=False)
        for v, b in enumerate(p.credal.vertices):
            for m, u in enumerate(p.preferences.members):
                for a in range(len(p.actions)):
                    assert p.eu[v, m, a] == pytest.approx(expected_utility(a, b, u))


def test_eu_bounds_attained_at_vertices(rng):
    # any convex combination of vertices stays inside the vertex bounds
    for _ in range(50):
        p = random_problem(rng, extras=False)
        B = p.credal.matrix()
        for a in range(len(p.actions)):
            lo, hi = eu_bounds(a, p.credal, p.preferences)
            w = rng.dirichlet(np.ones(len(B)), size=20)
            for mix in w @ B:
                for u in p.preferences.members:
                    e = expected_utility(a, mix, u)
                    assert lo - 1e-9 <= e <= hi + 1e-9


probs = st.lists(st.floats(0, 1), min_size=3, max_size=3).filter(lambda x: sum(x) > 0.1)


@given(probs, probs, st.floats(0, 1), st.lists(st.floats(-10, 10), min_size=3, max_size=3))
def test_expected_utility_linear_in_belief(p1, p2, alpha, row):
    b1 = np.array(p1) / sum(p1)
    b2 = np.array(p2) / sum(p2)
    u = UtilityModel([row])
    mix = alpha * b1 + (1 - alpha) * b2
    lhs = expected_utility(0, mix, u)
    rhs = alpha * expected_utility(0, b1, u) + (1 - alpha) * expected_utility(0, b2, u)
    assert lhs == pytest.approx(rhs, abs=1e-9)


@settings(max_examples=200)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100), st.floats(-100, 100))
def test_argmax_invariant_under_positive_affine_map(seed, k, c):
    rng = np.random.default_rng(seed)
    p = random_problem(rng, extras=False)
    q = p.with_utilities(k, c)
    for v in range(len(p.credal)):
        for m in range(len(p.preferences)):
            e, f = p.eu[v, m], q.eu[v, m]
            best_p = set(np.flatnonzero(e >= e.max() - 1e-9))
            best_q = set(np.flatnonzero(f >= f.max() - 1e-9 * k))
            assert best_p == best_q


def test_score_first_choice():
    acts = ActionSet(("x", "y"), attributes=[[1.0, 0.0], [0.0, 2.0]], attribute_names=("e", "c"))
    assert score_first_choice(acts, [1.0, 0.6]) == ["y"]
    assert score_first_choice(acts, [1.0, 0.5]) == ["x", "y"]
