"""Command-line front end.

Exit statuses: 0 success, 1 validation failure, 2 parse or I/O failure,
3 refused operation.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import score_first_choice, validate_problem
from .criteria import e_admissible_set, gamma_maximin, minimax_regret
from .dominance import maximal_set
from .evaluation import (
    PerturbationFamily,
    decision_curve,
    flip_rate,
    threshold_policy,
)
from .heuristics import FrugalTree, fft_confusion, fft_decide, fft_learn
from .io import (
    ScenarioError,
    baseline_weight_vector,
    load_cohort,
    load_cue_dataset,
    load_scenario,
    vignette_path,
)
from .pipeline import apply_constraints, run_pipeline

EXIT_OK, EXIT_INVALID, EXIT_PARSE, EXIT_REFUSED = 0, 1, 2, 3
RULES = ("pipeline", "maximality", "e-admissible", "gamma-maximin", "minimax-regret")


class Refused(Exception):
    pass


def _digest(path) -> str:
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from exc


def make_report(command: str, payload: dict, *, digest: str | None = None,
                seed: int | None = None, generated_at: str | None = None) -> dict:
    """Structured run record. Only ``header.generated_at`` varies between
    identical runs."""
    if generated_at is None:
        generated_at = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return {
        "header": {"generated_at": generated_at},
        "tool": "robustdecide",
        "version": __version__,
        "command": command,
        "input_digest": digest,
        "seed": seed,
        "payload": payload,
    }


def _emit(args, report: dict, text: str) -> None:
    doc = json.dumps(report, indent=2, sort_keys=False)
    if args.format == "structured":
        print(doc)
    else:
        print(text)
    if args.output:
        Path(args.output).write_text(doc + "\n")


# --- subcommands ---------------------------------------------------------------


def cmd_validate(args) -> int:
    scen = load_scenario(args.input)
    rep = validate_problem(scen.problem)
    payload = {"ok": rep.ok, "violations": list(rep.violations)}
    text = "ok" if rep.ok else "validation failed:\n" + "\n".join(f"  - {v}" for v in rep.violations)
    _emit(args, make_report("validate", payload, digest=scen.digest), text)
    return EXIT_OK if rep.ok else EXIT_INVALID


def _format_outcome(d: dict) -> str:
    lines = []
    for stage, tr in d["trace"].items():
        for e in tr["eliminated"]:
            by = f" by {e['by']}" if e["by"] else ""
            lines.append(f"[{stage}] eliminated {e['action']}: {e['reason']}{by}")
    lines.append("undominated: " + ", ".join(d["undominated_set"]))
    lines.append("epsilon classes: " + " | ".join("{" + ", ".join(c) + "}" for c in d["epsilon_classes"]))
    rec = d["recommendation"]
    extra = f" ({rec['info_action']})" if rec["info_action"] else ""
    lines.append(f"recommendation: {rec['kind']}{extra}: {', '.join(rec['actions'])}")
    if rec["note"]:
        lines.append(f"  note: {rec['note']}")
    return "\n".join(lines)


def decide_payload(problem, rule: str) -> dict:
    rep = validate_problem(problem)
    if not rep.ok:
        raise ValueError("; ".join(rep.violations))
    if rule == "pipeline":
        return {"rule": rule, "epsilon": problem.epsilon, "outcome": run_pipeline(problem).to_dict()}
    feas = apply_constraints(problem)
    base = {"rule": rule, "epsilon": problem.epsilon, "constraints": feas.to_dict()}
    acts = list(feas.survivors)
    if not acts:
        return {**base, "infeasible": True, "chosen": []}
    if rule == "maximality":
        tr = maximal_set(problem, acts, epsilon=problem.epsilon)
        return {**base, "chosen": list(tr.survivors), "dominance": tr.to_dict()}
    if rule == "e-admissible":
        return {**base, "chosen": list(e_admissible_set(acts, problem))}
    if rule == "gamma-maximin":
        chosen, v = gamma_maximin(acts, problem)
        return {**base, "chosen": list(chosen), "worst_case_eu": v}
    if rule == "minimax-regret":
        if len(problem.preferences) != 1:
            raise Refused(
                "minimax regret compares utility differences, which needs interval-meaningful "
                f"utilities; narrow the preference set to a single member (found {len(problem.preferences)})"
            )
        chosen, r = minimax_regret(acts, problem)
        return {**base, "chosen": list(chosen), "max_regret": r}
    raise ValueError(f"unknown rule {rule!r}")


def cmd_decide(args) -> int:
    scen = load_scenario(args.input)
    problem = scen.problem
    if args.epsilon is not None:
        problem = problem.with_epsilon(args.epsilon)
    rep = validate_problem(problem)
    if not rep.ok:
        print("validation failed:\n" + "\n".join(f"  - {v}" for v in rep.violations), file=sys.stderr)
        return EXIT_INVALID
    payload = decide_payload(problem, args.rule)
    if args.rule == "pipeline":
        text = _format_outcome(payload["outcome"])
    else:
        text = f"{args.rule}: " + ", ".join(payload["chosen"])
    _emit(args, make_report("decide", payload, digest=scen.digest), text)
    return EXIT_OK


def vignette_payload() -> tuple[dict, str]:
    scen = load_scenario(vignette_path())
    problem = scen.problem
    outcome = run_pipeline(problem).to_dict()
    weights = baseline_weight_vector(problem, scen.baseline_weights)
    scores = dict(zip(problem.actions.ids, (problem.actions.attributes @ np.array(weights)).tolist()))
    baseline = score_first_choice(problem.actions, weights)
    feasible = set(outcome["feasible_set"])
    payload = {
        "scenario": problem.name,
        "score_first": {
            "weights": scen.baseline_weights,
            "scores": scores,
            "choice": baseline,
            "choice_is_feasible": all(a in feasible for a in baseline),
        },
        "ordinal_first": outcome,
    }
    return payload, scen.digest


def cmd_vignette(args) -> int:
    payload, digest = vignette_payload()
    sf = payload["score_first"]
    text = "\n".join(
        [
            "score-first: " + ", ".join(f"{a}={s:.3f}" for a, s in sf["scores"].items()),
            f"  picks {', '.join(sf['choice'])} (feasible: {sf['choice_is_feasible']})",
            "ordinal-first:",
            _format_outcome(payload["ordinal_first"]),
        ]
    )
    _emit(args, make_report("vignette", payload, digest=digest), text)
    return EXIT_OK


def cmd_learn_fft(args) -> int:
    data = load_cue_dataset(args.input)
    tree = fft_learn(data, max_depth=args.depth, ordering=args.ordering)
    conf = fft_confusion(tree, data)
    payload = {
        "tree": tree.to_dict(),
        "training": conf.to_dict(),
        "depth": tree.depth,
        "ordering": args.ordering,
    }
    text = tree.describe() + f"\ntraining accuracy {conf.accuracy:.4f} " + str(conf.to_dict())
    if tree.degenerate:
        print("warning: single-class dataset; degenerate one-level tree", file=sys.stderr)
    _emit(args, make_report("learn-fft", payload, digest=_digest(args.input)), text)
    return EXIT_OK


def _load_tree(path) -> FrugalTree:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot load tree {path}: {exc}") from exc
    if "payload" in doc:
        doc = doc["payload"]
    if "tree" in doc:
        doc = doc["tree"]
    try:
        return FrugalTree.from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed tree in {path}: {exc}") from exc


def cmd_decide_fft(args) -> int:
    tree = _load_tree(args.tree)
    data = load_cue_dataset(args.input) if args.labelled else None
    if data is None:
        from .io import _read_rows

        header, rows = _read_rows(args.input)
        try:
            X = np.array([[float(c) for c in r] for _, r in rows])
        except ValueError as exc:
            raise ScenarioError(f"{args.input}: non-numeric cue value: {exc}") from exc
    else:
        X = data.X
    decisions = []
    for row in X:
        action, level = fft_decide(tree, row)
        decisions.append({"action": action, "exit_level": level})
    payload = {"tree": tree.to_dict(), "decisions": decisions}
    text = "\n".join(f"row {i + 1}: {d['action']} (exit level {d['exit_level']})"
                     for i, d in enumerate(decisions))
    _emit(args, make_report("decide-fft", payload, digest=_digest(args.input)), text)
    return EXIT_OK


def _parse_perturbation(spec: str, draws: int, seed: int) -> PerturbationFamily:
    kind, _, scale = spec.partition(":")
    try:
        return PerturbationFamily(kind, float(scale or 0.0), draws=draws, seed=seed)
    except ValueError as exc:
        raise Refused(f"bad perturbation spec {spec!r}: {exc}") from exc


def cmd_evaluate(args) -> int:
    cohort = load_cohort(args.input)
    try:
        grid = [float(t) for t in args.thresholds.split(",")]
    except ValueError as exc:
        raise Refused(f"bad threshold list: {exc}") from exc
    if any(not 0 < t < 1 for t in grid):
        raise Refused("thresholds must lie strictly between 0 and 1")
    family = _parse_perturbation(args.perturbation, args.draws, args.seed)
    curve = decision_curve(cohort, grid)
    flips = []
    for t in grid:
        fr = flip_rate(threshold_policy(t), cohort.probabilities, family, vectorized=True)
        flips.append({"p_star": t, "rate": fr.rate, "std_error": fr.std_error, "trials": fr.trials})
    payload = {
        "n": cohort.n,
        "prevalence": cohort.prevalence,
        "decision_curve": [
            {"p_star": c.p_star, "model": c.model, "treat_all": c.treat_all, "treat_none": c.treat_none}
            for c in curve
        ],
        "perturbation": {"kind": family.kind, "scale": family.scale, "draws": family.draws},
        "flip_rates": flips,
    }
    lines = ["p*      NB(model)  NB(all)   NB(none)  flip rate (se)"]
    for c, f in zip(curve, flips):
        lines.append(f"{c.p_star:<7.3f} {c.model:>9.5f} {c.treat_all:>9.5f} {c.treat_none:>8.5f}  "
                     f"{f['rate']:.4f} ({f['std_error']:.4f})")
    _emit(args, make_report("evaluate", payload, digest=_digest(args.input), seed=args.seed), "\n".join(lines))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robustdecide", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", "-i", required=True)
        p.add_argument("--format", choices=("text", "structured"), default="text")
        p.add_argument("--output", "-o", help="write the structured report here")

    p = sub.add_parser("validate", help="check a scenario file")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("decide", help="run a decision rule on a scenario")
    common(p)
    p.add_argument("--rule", choices=RULES, default="pipeline")
    p.add_argument("--epsilon", type=float, help="override the scenario's epsilon")
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("vignette", help="reproduce the shipped therapy-selection case")
    common(p, needs_input=False)
    p.set_defaults(func=cmd_vignette)

    p = sub.add_parser("learn-fft", help="learn a fast-and-frugal tree from a cue table")
    common(p)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--ordering", choices=("validity", "accuracy"), default="validity")
    p.set_defaults(func=cmd_learn_fft)

    p = sub.add_parser("decide-fft", help="apply a saved tree to cue rows")
    common(p)
    p.add_argument("--tree", required=True, help="tree file or learn-fft report")
    p.add_argument("--labelled", action="store_true", help="input has a 'label' column to ignore")
    p.set_defaults(func=cmd_decide_fft)

    p = sub.add_parser("evaluate", help="decision curve and flip rates for a cohort")
    common(p)
    p.add_argument("--thresholds", default=",".join(f"{t / 100:g}" for t in range(5, 100, 5)))
    p.add_argument("--perturbation", default="gaussian_noise:0.05",
                   help="kind:scale with kind in gaussian_noise, missingness, cue_flip")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--draws", type=int, default=1000)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except Refused as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
