"""JSON documents: policy models, DACC instances, graphs, verdicts.

Every document carries ``"schema": "ngacsafe/1"``. Output is key-sorted so
identical inputs serialize to identical bytes.
"""

from __future__ import annotations

import json
from typing import Any, Optional

import jsonschema

from ngacsafe._order import canonical, sort_key
from ngacsafe.dacc import ConstraintGraph, DaccInstance, DaccVerdict
from ngacsafe.model import (
    Action,
    Command,
    Edge,
    EdgeKind,
    EntityKind,
    NgacModel,
    StateDigraph,
    Vertex,
)
from ngacsafe.reductions import SimpleGraph
from ngacsafe.safety import SafetyVerdict, Witness

SCHEMA_VERSION = "ngacsafe/1"

_KIND_KEYS = {
    EntityKind.USER: "users",
    EntityKind.USER_ATTR: "userAttrs",
    EntityKind.RESOURCE: "resources",
    EntityKind.RESOURCE_ATTR: "resourceAttrs",
}

_name = {"type": "string", "minLength": 1}
_names = {"type": "array", "items": _name}
_node = {"type": ["string", "integer"]}
_edge = {
    "type": "object",
    "required": ["kind", "src", "dst"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": [k.value for k in EdgeKind]},
        "src": _name,
        "dst": _name,
        "label": {"type": ["string", "null"]},
    },
}
_entities = {
    "type": "object",
    "additionalProperties": False,
    "properties": {key: _names for key in _KIND_KEYS.values()},
}
_version = {"const": SCHEMA_VERSION}

MODEL_SCHEMA = {
    "type": "object",
    "required": ["schema", "universe", "rights", "initial", "commands"],
    "additionalProperties": False,
    "properties": {
        "schema": _version,
        "universe": _entities,
        "rights": _names,
        "initial": {
            "type": "object",
            "additionalProperties": False,
            "properties": {**{key: _names for key in _KIND_KEYS.values()}, "edges": {"type": "array", "items": _edge}},
        },
        "commands": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "action", "target"],
                "additionalProperties": False,
                "properties": {
                    "name": _name,
                    "action": {"enum": [a.value for a in Action]},
                    "target": {"enum": [k.value for k in EntityKind] + [k.value for k in EdgeKind]},
                    "guard": {"oneOf": [_edge, {"type": "null"}]},
                    "absent": {"type": "array", "items": _edge},
                },
            },
        },
    },
}

INSTANCE_SCHEMA = {
    "type": "object",
    "required": ["schema", "vertices", "edges", "source", "target"],
    "additionalProperties": False,
    "properties": {
        "schema": _version,
        "vertices": {"type": "array", "items": _node},
        "edges": {"type": "array", "items": {"type": "array", "items": _node, "minItems": 2, "maxItems": 2}},
        "conflicts": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2},
        },
        "source": _node,
        "target": _node,
    },
}

GRAPH_SCHEMA = {
    "type": "object",
    "required": ["schema", "vertices"],
    "additionalProperties": False,
    "properties": {
        "schema": _version,
        "vertices": {"type": "array", "items": _node},
        "edges": {"type": "array", "items": {"type": "array", "items": _node, "minItems": 2, "maxItems": 2}},
    },
}

CONSTRAINT_SCHEMA = {
    "type": "object",
    "required": ["schema", "vertices"],
    "additionalProperties": False,
    "properties": {
        "schema": _version,
        "vertices": {"type": "array", "items": _node},
        "conflicts": {"type": "array", "items": {"type": "array", "items": _node, "minItems": 2, "maxItems": 2}},
    },
}


class DocumentError(ValueError):
    """Malformed document. ``line``/``column`` are set for JSON syntax errors, ``path`` for schema errors."""

    def __init__(self, message: str, *, line: Optional[int] = None, column: Optional[int] = None, path: str = ""):
        self.line, self.column, self.path = line, column, path
        where = f"line {line}, column {column}: " if line is not None else (f"at {path}: " if path else "")
        super().__init__(where + message)


def dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _load(data, schema) -> dict:
    if isinstance(data, (bytes, bytearray)):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DocumentError(f"input is not UTF-8 ({exc.reason})") from exc
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise DocumentError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    errs = sorted(jsonschema.Draft202012Validator(schema).iter_errors(data), key=lambda e: list(e.absolute_path))
    if errs:
        err = errs[0]
        path = "/" + "/".join(str(p) for p in err.absolute_path)
        raise DocumentError(err.message, path=path)
    return data


def _edge_doc(e: Edge) -> dict:
    doc = {"kind": e.kind.value, "src": e.src, "dst": e.dst}
    if e.label is not None:
        doc["label"] = e.label
    return doc


def _edge_from(doc: dict) -> Edge:
    return Edge(EdgeKind(doc["kind"]), doc["src"], doc["dst"], doc.get("label"))


def _entities_doc(vertices) -> dict:
    return {key: sorted(v.name for v in vertices if v.kind is kind) for kind, key in _KIND_KEYS.items()}


def _entities_from(doc: dict) -> frozenset:
    return frozenset(Vertex(n, kind) for kind, key in _KIND_KEYS.items() for n in doc.get(key, []))


def _target(value: str):
    try:
        return EntityKind(value)
    except ValueError:
        return EdgeKind(value)


def command_to_doc(cmd: Command) -> dict:
    doc = {"name": cmd.name, "action": cmd.action.value, "target": cmd.target.value}
    if cmd.guard is not None:
        doc["guard"] = _edge_doc(cmd.guard)
    if cmd.absent:
        doc["absent"] = [_edge_doc(e) for e in sorted(cmd.absent)]
    return doc


def _command_from(doc: dict) -> Command:
    guard = doc.get("guard")
    return Command(
        doc["name"],
        Action(doc["action"]),
        _target(doc["target"]),
        _edge_from(guard) if guard else None,
        frozenset(_edge_from(e) for e in doc.get("absent", [])),
    )


def model_to_doc(model: NgacModel) -> dict:
    initial = _entities_doc(model.initial.vertices)
    initial["edges"] = [_edge_doc(e) for e in sorted(model.initial.edges)]
    return {
        "schema": SCHEMA_VERSION,
        "universe": _entities_doc(model.universe),
        "rights": sorted(model.rights),
        "initial": initial,
        "commands": [command_to_doc(c) for c in model.commands],
    }


def serialize_policy(model: NgacModel) -> str:
    return dumps(model_to_doc(model))


def parse_policy(data) -> NgacModel:
    """Parse a model document (bytes, str or already-decoded JSON)."""
    doc = _load(data, MODEL_SCHEMA)
    init = doc["initial"]
    initial = StateDigraph(_entities_from(init), frozenset(_edge_from(e) for e in init.get("edges", [])))
    return NgacModel(
        initial=initial,
        rights=frozenset(doc["rights"]),
        universe=_entities_from(doc["universe"]),
        commands=tuple(_command_from(c) for c in doc["commands"]),
    )


def instance_to_doc(inst: DaccInstance) -> dict:
    edges = canonical(inst.dag.edges)
    index = {e: i for i, e in enumerate(edges)}
    conflicts = sorted(sorted(index[x] for x in pair) for pair in inst.constraints.conflicts)
    return {
        "schema": SCHEMA_VERSION,
        "vertices": canonical(inst.dag.vertices),
        "edges": [list(e) for e in edges],
        "conflicts": conflicts,
        "source": inst.source,
        "target": inst.target,
    }


def parse_instance(data) -> DaccInstance:
    doc = _load(data, INSTANCE_SCHEMA)
    edges = [tuple(e) for e in doc["edges"]]
    if len(set(edges)) != len(edges):
        raise DocumentError("duplicate edge", path="/edges")
    conflicts = []
    for k, (i, j) in enumerate(doc.get("conflicts", [])):
        if i >= len(edges) or j >= len(edges):
            raise DocumentError(f"edge index out of range ({len(edges)} edges)", path=f"/conflicts/{k}")
        if i == j:
            raise DocumentError("an edge cannot conflict with itself", path=f"/conflicts/{k}")
        conflicts.append((edges[i], edges[j]))
    try:
        return DaccInstance.build(doc["vertices"], edges, conflicts, doc["source"], doc["target"])
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc


def graph_to_doc(g: SimpleGraph) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "vertices": list(g.vertices),
        "edges": sorted(canonical(e) for e in g.edges),
    }


def parse_graph(data) -> SimpleGraph:
    doc = _load(data, GRAPH_SCHEMA)
    try:
        return SimpleGraph.of(doc["vertices"], doc.get("edges", []))
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc


def constraint_graph_to_doc(cg: ConstraintGraph) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "vertices": canonical(cg.vertices),
        "conflicts": sorted((canonical(p) for p in cg.conflicts), key=sort_key),
    }


def parse_constraint_graph(data) -> ConstraintGraph:
    doc = _load(data, CONSTRAINT_SCHEMA)
    try:
        return ConstraintGraph(frozenset(doc["vertices"]), frozenset(frozenset(p) for p in doc.get("conflicts", [])))
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc


def _arg_doc(arg) -> dict:
    if isinstance(arg, Edge):
        return _edge_doc(arg)
    return {"kind": arg.kind.value, "name": arg.name}


def witness_doc(w: Witness, *, with_sequence: bool) -> dict:
    doc = {"user": w.user, "resource": w.resource, "right": w.right}
    if with_sequence:
        doc["sequence"] = [{"command": cmd.name, "argument": _arg_doc(arg)} for cmd, arg in w.sequence]
    return doc


def parse_sequence(model: NgacModel, steps: list) -> list:
    """Turn a witness ``sequence`` list back into (Command, argument) pairs."""
    out = []
    for step in steps:
        cmd = model.command(step["command"])
        arg = step["argument"]
        if "src" in arg:
            out.append((cmd, _edge_from(arg)))
        else:
            out.append((cmd, Vertex(arg["name"], EntityKind(arg["kind"]))))
    return out


def safety_doc(v: SafetyVerdict, *, with_sequence: bool = False, timing: bool = False) -> dict:
    stats = {"tuplesChecked": v.stats.tuples_checked, "misEnumerated": v.stats.mis_enumerated}
    if timing:
        stats["elapsedMs"] = round(v.stats.elapsed_ms, 3)
    doc = {"schema": SCHEMA_VERSION, "verdict": "safe" if v.safe else "unsafe", "stats": stats}
    if v.witness is not None:
        doc["witness"] = witness_doc(v.witness, with_sequence=with_sequence)
    return doc


def dacc_doc(v: DaccVerdict, *, elapsed_ms: Optional[float] = None) -> dict:
    stats = {"misEnumerated": v.mis_examined}
    if elapsed_ms is not None:
        stats["elapsedMs"] = round(elapsed_ms, 3)
    doc = {"schema": SCHEMA_VERSION, "verdict": "reachable" if v.reachable else "unreachable", "stats": stats}
    if v.reachable:
        doc["witness"] = {
            "path": list(v.witness_path),
            "edges": [list(e) for e in canonical(v.witness_edges)],
        }
    return doc
