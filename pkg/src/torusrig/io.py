"""JSON documents for graphs and reduction traces.

Graph documents are validated against ``schema/graph.schema.json``. The
canonical text form sorts bodies, orders edges by id, sorts keys and indents
by two spaces, so parse followed by serialize is byte-identical on canonical
input.
"""

from __future__ import annotations

import hashlib
import json
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from .constructions import PinchSpec, ReductionStep, ReductionTrace, graph_document
from .errors import DocumentError, DomainError
from .gain_graph import Edge, Gain, GainGraph


@lru_cache(maxsize=1)
def graph_schema() -> dict:
    text = resources.files("torusrig").joinpath("schema/graph.schema.json").read_text("utf-8")
    return json.loads(text)


def _field_path(err: jsonschema.ValidationError) -> str:
    parts = ["$"]
    for p in err.absolute_path:
        parts.append(f"[{p}]" if isinstance(p, int) else f".{p}")
    return "".join(parts)


def load_json(text: str, source: str = "<input>") -> object:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(exc.msg, f"{source}:{exc.lineno}:{exc.colno}") from None


def graph_from_document(doc: object, source: str = "<input>") -> GainGraph:
    validator = jsonschema.Draft202012Validator(graph_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        first = errors[0]
        raise DocumentError(first.message, f"{source} {_field_path(first)}")
    assert isinstance(doc, dict)
    bodies = doc["bodies"]
    known = set(bodies)
    edges = []
    seen: set[int] = set()
    for k, item in enumerate(doc["edges"]):
        where = f"{source} $.edges[{k}]"
        eid = item.get("id", k)
        if eid in seen:
            raise DocumentError(f"duplicate edge id {eid}", where)
        seen.add(eid)
        for end in ("u", "v"):
            if item[end] not in known:
                raise DocumentError(f"unknown body {item[end]!r}", f"{where}.{end}")
        try:
            edges.append(Edge(eid, item["u"], item["v"], Gain.of(item["gain"])))
        except DomainError as exc:
            raise DocumentError(str(exc), f"{where}.gain") from None
    return GainGraph(tuple(bodies), tuple(edges))


def parse(text: str, source: str = "<input>") -> GainGraph:
    return graph_from_document(load_json(text, source), source)


def read_graph(path: str | Path) -> GainGraph:
    p = Path(path)
    try:
        text = p.read_text("utf-8")
    except OSError as exc:
        raise DocumentError(exc.strerror or "unreadable", str(p)) from None
    return parse(text, str(p))


def dumps(doc: object) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def serialize(graph: GainGraph) -> str:
    return dumps(graph_document(graph))


def digest(graph: GainGraph) -> str:
    return "sha256:" + hashlib.sha256(serialize(graph).encode("utf-8")).hexdigest()


def trace_document(trace: ReductionTrace) -> dict:
    return {
        "terminal": graph_document(trace.terminal, canonical=False),
        "steps": [{"removed": s.removed, "pinch": s.spec.to_dict()} for s in trace.steps],
    }


def trace_from_document(doc: object, source: str = "<trace>") -> ReductionTrace:
    if not isinstance(doc, dict) or set(doc) != {"terminal", "steps"}:
        raise DocumentError("expected an object with exactly 'terminal' and 'steps'", source)
    terminal = graph_from_document(doc["terminal"], f"{source} $.terminal")
    steps = []
    for k, item in enumerate(doc["steps"]):
        try:
            spec = PinchSpec.from_dict(item["pinch"])
            steps.append(ReductionStep(spec, item["removed"]))
        except (KeyError, TypeError, DomainError) as exc:
            raise DocumentError(f"malformed step ({exc})", f"{source} $.steps[{k}]") from None
    return ReductionTrace(tuple(steps), terminal)
