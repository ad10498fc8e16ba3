"""Scenario documents (JSON) and delimited-text datasets.

A scenario document looks like::

    {
      "name": "...",
      "states": ["x1", {"id": "x2", "label": "..."}],
      "actions": [{"id": "a1", "attributes": {"efficacy": 7}}, "a2"],
      "credal": [[0.5, 0.5], {"x1": 0.2, "x2": 0.8}],
      "preferences": [{"name": "pi0", "utilities": {"a1": {"x1": 1, "x2": 0}, ...}}],
      "constraints": {"affordable": {"a1": true, "a2": false}},
      "epsilon": 0.1,
      "safety": {"scale": ["Low", "Moderate", "High"], "grades": {"a1": "Low"}},
      "tie_break": null,
      "voi_weight": 1.0,
      "info_actions": [{"id": "u", "cost": 0.2, "findings": [
          {"id": "pos", "retained": [0], "likelihood": [0.9, 0.1]}, ...]}],
      "baseline": {"weights": {"efficacy": 0.5}}
    }

Utility rows may also be lists ordered like ``states``. A missing cell is
kept as NaN so that validation can report it.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .core import (
    ActionSet,
    Belief,
    CredalSet,
    DecisionProblem,
    InformationAction,
    PreferenceSet,
    StateSpace,
    UtilityModel,
)
from .evaluation import ClassifiedCohort
from .heuristics import CueDataset


class ScenarioError(ValueError):
    """The document could not be read or does not have the expected shape."""


@dataclass(frozen=True)
class Scenario:
    problem: DecisionProblem
    baseline_weights: dict[str, float] | None
    digest: str
    source: dict


def _entries(items, what):
    ids, labels, extra = [], [], []
    for it in items:
        if isinstance(it, str):
            ids.append(it)
            labels.append(it)
            extra.append({})
        elif isinstance(it, dict) and "id" in it:
            ids.append(str(it["id"]))
            labels.append(str(it.get("label", it["id"])))
            extra.append(it)
        else:
            raise ScenarioError(f"bad {what} entry: {it!r}")
    return ids, labels, extra


def _row(spec, keys, what):
    if isinstance(spec, dict):
        unknown = set(spec) - set(keys)
        if unknown:
            raise ScenarioError(f"{what} names unknown keys {sorted(unknown)}")
        return [float(spec[k]) if k in spec else float("nan") for k in keys]
    if isinstance(spec, list):
        vals = [float(x) for x in spec]
        return vals + [float("nan")] * (len(keys) - len(vals))
    raise ScenarioError(f"bad {what}: {spec!r}")


def problem_from_dict(doc: dict) -> tuple[DecisionProblem, dict[str, float] | None]:
    try:
        state_ids, state_labels, _ = _entries(doc["states"], "state")
        action_ids, action_labels, action_extra = _entries(doc["actions"], "action")

        attr_names = list(doc.get("attribute_names", ()))
        if not attr_names:
            for ex in action_extra:
                for k in ex.get("attributes", {}):
                    if k not in attr_names:
                        attr_names.append(k)
        attributes = None
        if attr_names:
            attributes = np.array(
                [_row(ex.get("attributes", {}), attr_names, "attributes") for ex in action_extra]
            )

        credal_doc = doc["credal"]
        if isinstance(credal_doc, dict):
            credal_doc = credal_doc["vertices"]
        vertices = tuple(Belief(_row(v, state_ids, "belief vertex")) for v in credal_doc)

        members = []
        for k, pdoc in enumerate(doc["preferences"]):
            util = pdoc["utilities"]
            table = np.full((len(action_ids), len(state_ids)), np.nan)
            for a, row in util.items():
                if a not in action_ids:
                    raise ScenarioError(f"utilities name unknown action {a!r}")
                table[action_ids.index(a)] = _row(row, state_ids, f"utility row {a}")
            members.append(UtilityModel(table, str(pdoc.get("name", f"pi{k}"))))

        constraints = {
            str(c): {str(a): bool(v) for a, v in flags.items()}
            for c, flags in doc.get("constraints", {}).items()
        }

        safety = doc.get("safety")
        grades, scale = None, ("Low", "Moderate", "High")
        if safety is not None:
            grades = {str(a): str(g) for a, g in safety["grades"].items()}
            scale = tuple(safety.get("scale", scale))

        infos = []
        for u in doc.get("info_actions", ()):
            fs = u["findings"]
            infos.append(
                InformationAction(
                    id=str(u["id"]),
                    cost=float(u.get("cost", 0.0)),
                    findings=tuple(str(f["id"]) for f in fs),
                    retained=tuple(tuple(f["retained"]) for f in fs),
                    likelihood=np.array([[float(x) for x in f["likelihood"]] for f in fs]),
                )
            )

        problem = DecisionProblem(
            states=StateSpace(tuple(state_ids), tuple(state_labels)),
            actions=ActionSet(tuple(action_ids), tuple(action_labels), attributes, tuple(attr_names)),
            credal=CredalSet(vertices),
            preferences=PreferenceSet(tuple(members)),
            constraints=constraints,
            epsilon=float(doc.get("epsilon", 0.0)),
            info_actions=tuple(infos),
            safety_grades=grades,
            safety_scale=scale,
            tie_break=doc.get("tie_break"),
            voi_weight=float(doc.get("voi_weight", 1.0)),
            name=str(doc.get("name", "")),
        )
        baseline = doc.get("baseline")
        weights = None
        if baseline is not None:
            weights = {str(k): float(v) for k, v in baseline["weights"].items()}
        return problem, weights
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ScenarioError(f"malformed scenario: {type(exc).__name__}: {exc}") from exc


def load_scenario(path: str | Path) -> Scenario:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ScenarioError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    problem, weights = problem_from_dict(doc)
    return Scenario(problem, weights, hashlib.sha256(raw).hexdigest(), doc)


def vignette_path() -> Path:
    """Location of the shipped psoriasis therapy-selection scenario."""
    return Path(str(resources.files("robustdecide") / "data" / "vignette_psoriasis.json"))


def load_vignette() -> Scenario:
    return load_scenario(vignette_path())


def baseline_weight_vector(problem: DecisionProblem, weights: dict[str, float]) -> list[float]:
    names = problem.actions.attribute_names
    missing = set(weights) - set(names)
    if missing:
        raise ScenarioError(f"baseline weights name unknown attributes {sorted(missing)}")
    return [weights.get(n, 0.0) for n in names]


# --- delimited text -----------------------------------------------------------


def _read_rows(path: str | Path) -> tuple[list[str], list[tuple[int, list[str]]]]:
    try:
        with open(path, newline="") as fh:
            sample = fh.read(4096)
            fh.seek(0)
            try:
                dialect = csv.Sniffer().sniff(sample, delimiters=",\t;")
            except csv.Error:
                dialect = csv.excel
            reader = csv.reader(fh, dialect)
            header = next(reader, None)
            if header is None:
                raise ScenarioError(f"{path} is empty")
            rows = [(n, r) for n, r in enumerate(reader, start=2) if any(c.strip() for c in r)]
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from exc
    return [h.strip() for h in header], rows


def load_cohort(path: str | Path, prob_col: str = "probability", label_col: str = "label") -> ClassifiedCohort:
    """Read a cohort file with a header row; bad rows are reported by line."""
    header, rows = _read_rows(path)
    for col in (prob_col, label_col):
        if col not in header:
            raise ScenarioError(f"{path}: missing column {col!r}")
    ip, il = header.index(prob_col), header.index(label_col)
    probs, labels, bad = [], [], []
    for line, r in rows:
        try:
            p = float(r[ip])
            y = int(r[il])
            if not 0.0 <= p <= 1.0 or y not in (0, 1):
                raise ValueError
        except (ValueError, IndexError):
            bad.append(line)
            continue
        probs.append(p)
        labels.append(y)
    if bad:
        raise ScenarioError(f"{path}: malformed rows at lines {', '.join(map(str, bad))}")
    if not probs:
        raise ScenarioError(f"{path}: no data rows")
    return ClassifiedCohort(np.array(probs), np.array(labels))


def load_cue_dataset(path: str | Path, label_col: str = "label") -> CueDataset:
    header, rows = _read_rows(path)
    if label_col not in header:
        raise ScenarioError(f"{path}: missing column {label_col!r}")
    il = header.index(label_col)
    names = [h for k, h in enumerate(header) if k != il]
    X, y, bad = [], [], []
    for line, r in rows:
        try:
            if len(r) != len(header):
                raise ValueError
            lab = int(r[il])
            if lab not in (0, 1):
                raise ValueError
            X.append([float(c) for k, c in enumerate(r) if k != il])
            y.append(lab)
        except ValueError:
            bad.append(line)
    if bad:
        raise ScenarioError(f"{path}: malformed rows at lines {', '.join(map(str, bad))}")
    if not y:
        raise ScenarioError(f"{path}: no data rows")
    return CueDataset(np.array(X), np.array(y), tuple(names))
