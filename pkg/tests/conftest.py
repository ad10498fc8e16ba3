import numpy as np
import pytest

from robustdecide.core import InformationAction, make_problem


def random_problem(rng, *, max_actions=5, max_states=4, max_vertices=8, max_members=4,
                   extras=True, singleton=False):
    """Small random decision problem.

    Half the instances use small integer utilities and quarter-step beliefs so
    that exact ties and shared EU values show up often.
    """
    n_a = int(rng.integers(1, max_actions + 1))
    n_s = int(rng.integers(1, max_states + 1))
    n_v = 1 if singleton else int(rng.integers(1, max_vertices + 1))
    n_m = 1 if singleton else int(rng.integers(1, max_members + 1))
    if rng.random() < 0.5:
        U = rng.integers(0, 4, size=(n_m, n_a, n_s)).astype(float)
        counts = rng.multinomial(4, np.ones(n_s) / n_s, size=n_v)
        B = counts / 4.0
    else:
        U = rng.normal(size=(n_m, n_a, n_s)).round(3)
        B = rng.dirichlet(np.ones(n_s), size=n_v)
    kw = {}
    if extras:
        kw["epsilon"] = float(rng.choice([0.0, 0.0, 0.05, 0.25, 1.0]))
        ids = [f"a{i}" for i in range(n_a)]
        if rng.random() < 0.5:
            kw["constraints"] = {
                "c0": {a: bool(rng.random() > 0.2) for a in ids},
                "c1": {a: bool(rng.random() > 0.1) for a in ids},
            }
        if rng.random() < 0.4:
            kw["safety_grades"] = {a: str(rng.choice(["Low", "Moderate", "High"])) for a in ids}
        kw["tie_break"] = [None, None, "gamma_maximin", "minimax_regret"][int(rng.integers(4))]
        if rng.random() < 0.4 and n_v > 1:
            infos = []
            for k in range(int(rng.integers(1, 3))):
                split = int(rng.integers(1, n_v))
                perm = rng.permutation(n_v)
                keep = (tuple(sorted(perm[:split].tolist())), tuple(sorted(perm[split:].tolist())))
                p = rng.random(n_v).round(2)
                infos.append(InformationAction(
                    f"u{k}", float(rng.choice([0.0, 0.1, 0.6])), ("f0", "f1"), keep,
                    np.vstack([p, 1 - p]),
                ))
            kw["info_actions"] = tuple(infos)
    return make_problem(U, B, **kw)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def oracle_mismatches(problem):
    """Fields where the library and the brute-force reference disagree."""
    from robustdecide.criteria import e_admissible_set, gamma_maximin
    from robustdecide.dominance import maximal_set
    from robustdecide.evaluation import oracle_admissible
    from robustdecide.pipeline import run_pipeline

    ref = oracle_admissible(problem)
    out = run_pipeline(problem, with_gap=False)
    got = {
        "maximal": set(maximal_set(problem).survivors),
        "e_admissible": set(e_admissible_set(None, problem)),
        "gamma_maximin": set(gamma_maximin(None, problem)[0]),
        "feasible": set(out.feasible_set),
        "safe": set(out.safe_set),
        "undominated": set(out.undominated_set),
        "classes": sorted(sorted(c) for c in out.epsilon_classes),
        "recommendation": out.recommendation.kind,
        "recommended": set(out.recommendation.actions),
        "info_action": out.recommendation.info_action,
    }
    want = {
        "maximal": set(ref.maximal),
        "e_admissible": set(ref.e_admissible),
        "gamma_maximin": set(ref.gamma_maximin),
        "feasible": set(ref.feasible),
        "safe": set(ref.safe),
        "undominated": set(ref.undominated),
        "classes": sorted(sorted(c) for c in ref.classes),
        "recommendation": ref.recommendation,
        "recommended": set(ref.recommended),
        "info_action": ref.info_action,
    }
    return [k for k in got if got[k] != want[k]]


def write_cli_fixtures(directory):
    """Write small input files and return argv lists (minus --output) for
    every CLI subcommand."""
    import json
    from pathlib import Path

    from robustdecide.io import vignette_path

    d = Path(directory)
    scen = d / "scenario.json"
    scen.write_text(Path(vignette_path()).read_text())
    rng = np.random.default_rng(0)
    y = (rng.random(200) < 0.3).astype(int)
    p = np.clip(0.3 + 0.4 * (y - 0.3) + 0.15 * rng.normal(size=200), 0, 1).round(4)
    cohort = d / "cohort.csv"
    cohort.write_text("probability,label\n" + "".join(f"{a},{b}\n" for a, b in zip(p, y)))
    X = rng.integers(0, 2, (60, 3))
    lab = X[:, 1]
    cues = d / "cues.csv"
    cues.write_text("fever,rash,cough,label\n" + "".join(
        ",".join(map(str, r)) + f",{c}\n" for r, c in zip(X, lab)))
    tree = d / "tree.json"
    tree.write_text(json.dumps({"levels": [
        {"cue": 1, "threshold": 0.5, "exit_side": "positive", "exit_action": 1,
         "direction": ">", "other_action": 0}]}))
    return {
        "validate": ["validate", "-i", str(scen)],
        "decide": ["decide", "-i", str(scen)],
        "vignette": ["vignette"],
        "learn-fft": ["learn-fft", "-i", str(cues)],
        "decide-fft": ["decide-fft", "-i", str(cues), "--tree", str(tree), "--labelled"],
        "evaluate": ["evaluate", "-i", str(cohort), "--thresholds", "0.2,0.5",
                     "--draws", "200", "--seed", "5"],
    }


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
