"""JSON scenario files, bundled fixtures and report schemas.

A compatibility file names its measurements, outcomes and contexts and
gives one probability row per context in the canonical outcome order.  An
exclusivity file gives a vertex count, an edge list and one probability per
event.  Probabilities are JSON numbers or strings; integer and ``"p/q"``
strings are read as exact rationals.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema

from ._numeric import number_to_json, to_number
from .errors import ValidationError
from .exclusivity import EventProbabilityVector, ExclusivityScenario
from .graphs import Graph
from .scenario import Behavior, CompatibilityScenario

FORMAT_VERSION = 1


class ParseError(ValidationError):
    """An input file is malformed.  ``location`` is a line number or a field path."""

    def __init__(self, message: str, location: str = ""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


@dataclass
class ScenarioFile:
    kind: str
    data: object  # Behavior or EventProbabilityVector
    name: str = ""
    weights: tuple | None = None


def load_schema(name: str) -> dict:
    text = resources.files("ctxgeom").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def _field_path(path) -> str:
    out = ""
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def _check_schema(doc, schema: str):
    validator = jsonschema.Draft202012Validator(load_schema(schema))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise ParseError(e.message, _field_path(e.absolute_path))


def _numbers(values, where: str) -> tuple:
    out = []
    for i, v in enumerate(values):
        try:
            out.append(to_number(v))
        except (ValueError, ZeroDivisionError, TypeError) as exc:
            raise ParseError(f"not a number ({exc})", f"{where}[{i}]") from None
    return tuple(out)


def parse_scenario(doc: dict) -> ScenarioFile:
    """Build a scenario file object from decoded JSON, with field diagnostics."""
    _check_schema(doc, "scenario")
    name = doc.get("name", "")
    if doc["kind"] == "compatibility":
        names = doc["measurements"]
        index = {m: i for i, m in enumerate(names)}
        ctxs = []
        for k, C in enumerate(doc["contexts"]):
            for t, m in enumerate(C):
                if m not in index:
                    raise ParseError(f"unknown measurement {m!r}", f"contexts[{k}][{t}]")
            if list(C) != sorted(C, key=index.get):
                raise ParseError("list context members in measurement order", f"contexts[{k}]")
            ctxs.append(tuple(index[m] for m in C))
        try:
            sc = CompatibilityScenario(tuple(names), tuple(ctxs), tuple(doc["outcomes"]))
        except ValidationError as exc:
            raise ParseError(str(exc), "contexts") from None
        rows = doc["behavior"]
        if len(rows) != sc.num_contexts:
            raise ParseError(f"expected {sc.num_contexts} rows, got {len(rows)}", "behavior")
        table = []
        for k, row in enumerate(rows):
            want = sc.offsets[k + 1] - sc.offsets[k]
            if len(row) != want:
                raise ParseError(f"expected {want} probabilities, got {len(row)}", f"behavior[{k}]")
            table.append(_numbers(row, f"behavior[{k}]"))
        try:
            B = Behavior(sc, tuple(table))
        except ValidationError as exc:
            raise ValidationError(f"behavior: {exc}") from None
        return ScenarioFile("compatibility", B, name)
    n = doc["vertices"]
    for t, (i, j) in enumerate(doc["edges"]):
        if i >= n or j >= n or i == j:
            raise ParseError(f"bad edge ({i}, {j})", f"edges[{t}]")
    G = Graph(n, tuple(tuple(e) for e in doc["edges"]))
    probs = _numbers(doc["probabilities"], "probabilities")
    if len(probs) != n:
        raise ParseError(f"expected {n} probabilities, got {len(probs)}", "probabilities")
    weights = None
    if "weights" in doc:
        weights = _numbers(doc["weights"], "weights")
        if len(weights) != n:
            raise ParseError(f"expected {n} weights", "weights")
    labels = tuple(doc["labels"]) if "labels" in doc else None
    try:
        v = EventProbabilityVector(ExclusivityScenario(G, labels), probs)
    except ValidationError as exc:
        raise ValidationError(f"probabilities: {exc}") from None
    return ScenarioFile("exclusivity", v, name, weights)


def loads_scenario(text: str) -> ScenarioFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", "line 1")
    return parse_scenario(doc)


def load_scenario(path) -> ScenarioFile:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read file ({exc.strerror})", str(path)) from None
    return loads_scenario(text)


def scenario_to_json(sf: ScenarioFile) -> dict:
    """Inverse of :func:`parse_scenario`."""
    doc = {"format_version": FORMAT_VERSION, "kind": sf.kind}
    if sf.name:
        doc["name"] = sf.name
    if sf.kind == "compatibility":
        B = sf.data
        sc = B.scenario
        doc["measurements"] = list(sc.measurements)
        doc["outcomes"] = list(sc.outcomes)
        doc["contexts"] = [[sc.measurements[i] for i in C] for C in sc.contexts]
        doc["behavior"] = [[number_to_json(v) for v in row] for row in B.table]
    else:
        v = sf.data
        G = v.scenario.graph
        doc["vertices"] = G.n
        doc["edges"] = [list(e) for e in G.edges]
        doc["probabilities"] = [number_to_json(x) for x in v.p]
        if sf.weights is not None:
            doc["weights"] = [number_to_json(x) for x in sf.weights]
        if v.scenario.labels is not None:
            doc["labels"] = list(v.scenario.labels)
    return doc


def dumps_scenario(sf: ScenarioFile) -> str:
    return json.dumps(scenario_to_json(sf), indent=2)


def behavior_file(B: Behavior, name: str = "") -> ScenarioFile:
    return ScenarioFile("compatibility", B, name)


def event_file(v: EventProbabilityVector, name: str = "", weights=None) -> ScenarioFile:
    return ScenarioFile("exclusivity", v, name, weights)


def fixture_names() -> list:
    root = resources.files("ctxgeom").joinpath("fixtures")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def fixture_path(name: str):
    return resources.files("ctxgeom").joinpath("fixtures", f"{name}.json")


def fixture_text(name: str) -> str:
    return fixture_path(name).read_text()


def load_fixture(name: str) -> ScenarioFile:
    return loads_scenario(fixture_text(name))


def validate_report(doc: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if ``doc`` does not match the report schema."""
    jsonschema.validate(doc, load_schema("report"), cls=jsonschema.Draft202012Validator)
