"""Robust ordinal decision layer: feasibility and safety screens, dominance
under imprecise beliefs and partial preferences, fast-and-frugal heuristics,
and decision-centric evaluation."""

__version__ = "0.1.0"

from .core import (
    ActionSet,
    Belief,
    CredalSet,
    DecisionProblem,
    InformationAction,
    PreferenceSet,
    StateSpace,
    UtilityModel,
    eu_bounds,
    expected_utility,
    make_problem,
    validate_problem,
)
from .criteria import (
    e_admissible_set,
    gamma_maximax,
    gamma_maximin,
    minimax_regret,
    regret_table,
)
from .dominance import (
    epsilon_classes,
    epsilon_dominates,
    maximal_set,
    pareto_dominates,
    robust_dominates,
)
from .pipeline import (
    apply_constraints,
    decision_gap,
    decision_margin_flip_probability,
    flip_probability_general_cdf,
    run_pipeline,
    safety_lexicographic_filter,
    threshold_interval_overlap,
    voi_gate,
)
