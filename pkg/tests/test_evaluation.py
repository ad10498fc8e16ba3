import numpy as np
import pytest

from robustdecide.core import make_problem
from robustdecide.evaluation import (
    ClassifiedCohort,
    OracleBoundsError,
    PerturbationFamily,
    decision_curve,
    flip_rate,
    net_benefit,
    net_benefit_counts,
    oracle_admissible,
    set_metrics,
    threshold_policy,
)
from robustdecide.pipeline import decision_margin_flip_probability



def fixture_cohort(seed=0, n=500):
    rng = np.random.default_rng(seed)
    y = (rng.random(n) < 0.3).astype(int)
    p = np.clip(0.3 + 0.4 * (y - 0.3) + 0.15 * rng.normal(size=n), 0, 1)
    return ClassifiedCohort(p, y)


# --- net benefit ------------------------------------------------------------------

def test_net_benefit_formula():
    assert net_benefit_counts(10, 10, 100, 0.2) == pytest.approx(0.075, abs=1e-15)


def test_net_benefit_identities():
    c = fixture_cohort()
    perfect = ClassifiedCohort(c.labels.astype(float), c.labels)
    nobody = ClassifiedCohort(np.zeros(c.n), c.labels)
    for t in (0.05, 0.2, 0.5, 0.9):
        assert net_benefit(perfect, t) == pytest.approx(c.prevalence, abs=1e-12)
        assert net_benefit(nobody, t) == 0.0
    with pytest.raises(ValueError):
        net_benefit(c, 0.0)
    with pytest.raises(ValueError):
        net_benefit(c, 1.0)


def test_decision_curve():
    c = fixture_cohort()
    curve = decision_curve(c, [0.1, c.prevalence, 0.6])
    assert all(pt.treat_none == 0.0 for pt in curve)
    assert curve[1].treat_all == pytest.approx(0.0, abs=1e-12)
    assert curve[0].treat_all > 0 > curve[2].treat_all
    assert curve[0].model == net_benefit(c, 0.1)


def test_cohort_validation():
    with pytest.raises(ValueError):
        ClassifiedCohort([0.5, 1.2], [0, 1])
    with pytest.raises(ValueError):
        ClassifiedCohort([0.5], [2])
    with pytest.raises(ValueError):
        ClassifiedCohort([0.5, 0.1], [1])


# --- flip rate ----------------------------------------------------------------------

def test_flip_rate_zero_noise():
    fam = PerturbationFamily("gaussian_noise", 0.0, draws=200)
    r = flip_rate(threshold_policy(0.5), np.array([0.4, 0.5001, 0.9]), fam)
    assert r.rate == 0.0 and r.flips == 0 and r.trials == 600


def test_flip_rate_constant_policy():
    for kind, scale in (("gaussian_noise", 3.0), ("missingness", 0.5), ("cue_flip", 0.5)):
        fam = PerturbationFamily(kind, scale, draws=100)
        assert flip_rate(lambda obs: "treat", np.random.default_rng(0).random((5, 2)), fam).rate == 0.0


def test_flip_rate_matches_closed_form():
    fam = PerturbationFamily("gaussian_noise", 0.1, draws=10_000, seed=7)
    r = flip_rate(threshold_policy(0.5), np.array([0.51]), fam, vectorized=True)
    target = decision_margin_flip_probability(0.01, 0.1)
    assert target == pytest.approx(0.46, abs=0.01)
    assert abs(r.rate - target) <= 3 * r.std_error


def test_flip_rate_vectorized_agrees():
    fam = PerturbationFamily("gaussian_noise", 0.2, draws=300, seed=3)
    cases = np.array([0.3, 0.45, 0.6])
    a = flip_rate(threshold_policy(0.5), cases, fam)
    b = flip_rate(threshold_policy(0.5), cases, fam, vectorized=True)
    assert a == b


def test_perturbation_streams_are_per_case():
    fam = PerturbationFamily("gaussian_noise", 1.0, draws=5, seed=11)
    x = np.array([0.0, 1.0])
    assert np.array_equal(fam.perturbed(x, 3), fam.perturbed(x, 3))
    assert not np.array_equal(fam.perturbed(x, 3), fam.perturbed(x, 4))


def test_perturbation_kinds():
    x = np.array([1.0, 0.0, 1.0])
    miss = PerturbationFamily("missingness", 1.0, draws=2, fill_value=-1).perturbed(x, 0)
    assert (miss == -1).all()
    flip = PerturbationFamily("cue_flip", 1.0, draws=2).perturbed(x, 0)
    assert (flip == 1 - x).all()
    for bad in (dict(kind="warp", scale=0.1), dict(kind="cue_flip", scale=1.5),
                dict(kind="gaussian_noise", scale=-1.0), dict(kind="gaussian_noise", scale=1, draws=0)):
        with pytest.raises(ValueError):
            PerturbationFamily(**bad)


# --- set metrics ------------------------------------------------------------------------

def test_set_metrics():
    full = set_metrics([(("a", "b", "c"), "b")] * 4)
    assert (full.coverage, full.mean_set_size, full.abstention_rate) == (1.0, 3.0, 0.0)
    single = set_metrics([(("a",), "a"), (("b",), "b")])
    assert (single.coverage, single.mean_set_size) == (1.0, 1.0)
    half = set_metrics([(("a",), "a"), (("a",), "b")])
    assert half.coverage == 0.5
    abst = set_metrics([(None, "a"), (("a", "b"), "a")])
    assert (abst.coverage, abst.mean_set_size, abst.abstention_rate) == (0.5, 2.0, 0.5)
    with pytest.raises(ValueError):
        set_metrics([])


# --- oracle -----------------------------------------------------------------------------

def test_oracle_refuses_large_problems():
    with pytest.raises(OracleBoundsError):
        oracle_admissible(make_problem(np.zeros((6, 2)), [0.5, 0.5]))
    with pytest.raises(OracleBoundsError):
        oracle_admissible(make_problem(np.zeros((2, 2)), np.full((9, 2), 0.5)))


def test_oracle_small_example():
    # a2 is never optimal and is dominated by a0
    p = make_problem([[1, 0], [0, 1], [0.4, 0]], [[1, 0], [0, 1]])
    ref = oracle_admissible(p)
    assert ref.maximal == ("a0", "a1")
    assert ref.e_admissible == ("a0", "a1")
    assert ref.recommendation == "present_set"
