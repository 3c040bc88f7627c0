"""NGAC model: entities, the state digraph, primitive operations, commands, access.

All values are immutable. Every mutation returns a new :class:`StateDigraph`.
"""

from __future__ import annotations

import functools
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, NamedTuple, Optional, Union

from ngacsafe._order import canonical


class EntityKind(str, Enum):
    USER = "user"
    USER_ATTR = "userAttr"
    RESOURCE = "resource"
    RESOURCE_ATTR = "resourceAttr"


class EdgeKind(str, Enum):
    USER_ASSIGN = "userAssign"
    RES_ASSIGN = "resAssign"
    ASSOC = "assoc"
    PROHIB = "prohib"

    @property
    def labeled(self) -> bool:
        return self in (EdgeKind.ASSOC, EdgeKind.PROHIB)


class Action(str, Enum):
    CREATE = "create"
    DESTROY = "destroy"


U, UA, R, RA = EntityKind.USER, EntityKind.USER_ATTR, EntityKind.RESOURCE, EntityKind.RESOURCE_ATTR

# (source kinds, destination kinds) allowed for each edge kind
EDGE_DOMAINS: dict[EdgeKind, tuple[frozenset, frozenset]] = {
    EdgeKind.USER_ASSIGN: (frozenset({U, UA}), frozenset({UA})),
    EdgeKind.RES_ASSIGN: (frozenset({RA}), frozenset({R, RA})),
    EdgeKind.ASSOC: (frozenset({UA}), frozenset({RA})),
    EdgeKind.PROHIB: (frozenset({UA}), frozenset({RA})),
}

_DOMAIN_TEXT = {
    EdgeKind.USER_ASSIGN: "(U x UA) | (UA x UA)",
    EdgeKind.RES_ASSIGN: "(RA x R) | (RA x RA)",
    EdgeKind.ASSOC: "UA x RA x Rights",
    EdgeKind.PROHIB: "UA x RA x Rights",
}


class Vertex(NamedTuple):
    name: str
    kind: EntityKind

    def sort_key(self) -> tuple:
        return (self.name, self.kind.value)

    def __str__(self) -> str:
        return f"{self.kind.value}:{self.name}"


@functools.total_ordering
@dataclass(frozen=True)
class Edge:
    kind: EdgeKind
    src: str
    dst: str
    label: Optional[str] = None

    def sort_key(self) -> tuple:
        return (self.src, self.dst, self.kind.value, self.label or "")

    def __lt__(self, other: "Edge") -> bool:
        if not isinstance(other, Edge):
            return NotImplemented
        return self.sort_key() < other.sort_key()

    @property
    def pair(self) -> tuple[str, str]:
        return (self.src, self.dst)

    def __str__(self) -> str:
        lab = f"[{self.label}]" if self.label is not None else ""
        return f"{self.kind.value}:{self.src}->{self.dst}{lab}"


def user_assign(src: str, dst: str) -> Edge:
    return Edge(EdgeKind.USER_ASSIGN, src, dst)


def res_assign(src: str, dst: str) -> Edge:
    return Edge(EdgeKind.RES_ASSIGN, src, dst)


def assoc(src: str, dst: str, right: str) -> Edge:
    return Edge(EdgeKind.ASSOC, src, dst, right)


def prohib(src: str, dst: str, right: str) -> Edge:
    return Edge(EdgeKind.PROHIB, src, dst, right)


Target = Union[Vertex, Edge]


class PreconditionError(ValueError):
    """A primitive operation's precondition does not hold in the given state."""


class MalformedArgument(TypeError):
    """A command argument does not match the command's operation type."""


@dataclass(frozen=True)
class StateDigraph:
    vertices: frozenset = frozenset()
    edges: frozenset = frozenset()

    @classmethod
    def build(cls, vertices: Iterable[Vertex] = (), edges: Iterable[Edge] = ()) -> "StateDigraph":
        return cls(frozenset(vertices), frozenset(edges))

    @functools.cached_property
    def kinds(self) -> Mapping[str, EntityKind]:
        return {v.name: v.kind for v in self.vertices}

    def kind_of(self, name: str) -> Optional[EntityKind]:
        return self.kinds.get(name)

    def names(self, kind: EntityKind) -> list[str]:
        return sorted(v.name for v in self.vertices if v.kind is kind)

    def has(self, item: Target) -> bool:
        if isinstance(item, Vertex):
            return item in self.vertices
        return item in self.edges

    @functools.cached_property
    def out_edges(self) -> Mapping[str, tuple]:
        adj: dict[str, list[Edge]] = {}
        for e in self.edges:
            adj.setdefault(e.src, []).append(e)
        return {k: tuple(sorted(v)) for k, v in adj.items()}

    def __str__(self) -> str:
        vs = ", ".join(str(v) for v in canonical(self.vertices))
        es = ", ".join(str(e) for e in sorted(self.edges))
        return f"StateDigraph(vertices=[{vs}], edges=[{es}])"


@dataclass(frozen=True)
class PrimitiveOp:
    action: Action
    target: Target

    def describe(self) -> str:
        what = self.target.kind.value
        return f"{self.action.value} {what} {self.target}"


@dataclass(frozen=True)
class Command:
    """A mono-operational guarded command with a single formal parameter.

    ``target`` is the type the parameter ranges over. A command without a guard
    accepts any argument of that type; with a guard it only runs when the
    argument equals the guard edge. ``absent`` lists the edges that must not be
    in the current state for the operation to run.
    """

    name: str
    action: Action
    target: Union[EntityKind, EdgeKind]
    guard: Optional[Edge] = None
    absent: frozenset = frozenset()

    @property
    def on_edges(self) -> bool:
        return isinstance(self.target, EdgeKind)

    @property
    def conditional(self) -> bool:
        return self.guard is not None or bool(self.absent)

    def bind(self, arg: Target) -> PrimitiveOp:
        if self.on_edges:
            if not isinstance(arg, Edge) or arg.kind is not self.target:
                raise MalformedArgument(f"command {self.name!r} expects a {self.target.value} edge, got {arg!r}")
        elif not isinstance(arg, Vertex) or arg.kind is not self.target:
            raise MalformedArgument(f"command {self.name!r} expects a {self.target.value} vertex, got {arg!r}")
        return PrimitiveOp(self.action, arg)

    def sort_key(self) -> tuple:
        return (self.name,)


@dataclass(frozen=True)
class NgacModel:
    initial: StateDigraph
    rights: frozenset
    universe: frozenset
    commands: tuple = field(default=())

    @functools.cached_property
    def universe_kinds(self) -> Mapping[str, EntityKind]:
        return {v.name: v.kind for v in self.universe}

    def command(self, name: str) -> Command:
        for c in self.commands:
            if c.name == name:
                return c
        raise KeyError(name)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.severity}: {self.code}: {self.message}"


def errors(diagnostics: Iterable[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diagnostics if d.severity == "error"]


def edge_domain_problem(edge: Edge, kinds: Mapping[str, EntityKind], rights: Optional[frozenset] = None) -> Optional[str]:
    """Return why ``edge`` is outside its endpoint-kind domain, or None when it fits."""
    src_kinds, dst_kinds = EDGE_DOMAINS[edge.kind]
    sk, dk = kinds.get(edge.src), kinds.get(edge.dst)
    if sk is None or dk is None:
        missing = edge.src if sk is None else edge.dst
        return f"{edge}: endpoint {missing!r} does not exist"
    if sk not in src_kinds or dk not in dst_kinds:
        return f"{edge}: ({sk.value}, {dk.value}) not in {_DOMAIN_TEXT[edge.kind]}"
    if edge.src == edge.dst:
        return f"{edge}: self-loop"
    if edge.kind.labeled:
        if edge.label is None:
            return f"{edge}: {edge.kind.value} edges need a right label"
        if rights is not None and edge.label not in rights:
            return f"{edge}: right {edge.label!r} is not declared"
    elif edge.label is not None:
        return f"{edge}: {edge.kind.value} edges carry no label"
    return None


def apply_primitive_op(
    state: StateDigraph,
    op: PrimitiveOp,
    *,
    universe: Optional[frozenset] = None,
    rights: Optional[frozenset] = None,
) -> StateDigraph:
    """Apply one primitive operation, raising PreconditionError if its condition fails.

    ``universe`` and ``rights`` are checked only when supplied.
    """
    t = op.target
    if isinstance(t, Vertex):
        if op.action is Action.CREATE:
            existing = state.kind_of(t.name)
            if existing is not None:
                raise PreconditionError(f"create {t.kind.value} {t.name!r}: already present as {existing.value}")
            if universe is not None and t not in universe:
                raise PreconditionError(f"create {t.kind.value} {t.name!r}: not a {t.kind.value} of the universe")
            return StateDigraph(state.vertices | {t}, state.edges)
        if t not in state.vertices:
            raise PreconditionError(f"destroy {t.kind.value} {t.name!r}: not present")
        kept = frozenset(e for e in state.edges if e.src != t.name and e.dst != t.name)
        return StateDigraph(state.vertices - {t}, kept)

    if op.action is Action.CREATE:
        if t in state.edges:
            raise PreconditionError(f"create {t.kind.value} {t}: already present")
        problem = edge_domain_problem(t, state.kinds, rights)
        if problem is not None:
            raise PreconditionError(f"create {t.kind.value} {problem}")
        return StateDigraph(state.vertices, state.edges | {t})
    if t not in state.edges:
        raise PreconditionError(f"destroy {t.kind.value} {t}: not present")
    return StateDigraph(state.vertices, state.edges - {t})


def execute_command(
    state: StateDigraph,
    cmd: Command,
    arg: Target,
    *,
    universe: Optional[frozenset] = None,
    rights: Optional[frozenset] = None,
) -> StateDigraph:
    """Run ``cmd(arg)``. A failed guard or condition leaves ``state`` unchanged."""
    op = cmd.bind(arg)
    if cmd.guard is not None and arg != cmd.guard:
        return state
    if any(e in state.edges for e in cmd.absent):
        return state
    try:
        return apply_primitive_op(state, op, universe=universe, rights=rights)
    except PreconditionError:
        return state


def replay(model: NgacModel, sequence: Iterable[tuple], start: Optional[StateDigraph] = None) -> StateDigraph:
    state = model.initial if start is None else start
    for cmd, arg in sequence:
        state = execute_command(state, cmd, arg, universe=model.universe, rights=model.rights)
    return state


def _traversable(edge: Edge, right: str) -> bool:
    if edge.kind is EdgeKind.ASSOC:
        return edge.label == right
    return edge.kind is not EdgeKind.PROHIB


def _reach(state: StateDigraph, start: str, right: str) -> set[str]:
    seen = {start}
    queue = deque([start])
    adj = state.out_edges
    while queue:
        node = queue.popleft()
        for e in adj.get(node, ()):
            if e.dst not in seen and _traversable(e, right):
                seen.add(e.dst)
                queue.append(e.dst)
    return seen


def access_holds(state: StateDigraph, user: str, right: str, resource: str) -> bool:
    """Whether ``user`` reaches ``resource`` through an association labeled ``right``.

    Associations with other labels are dropped before the search; prohibitions
    never carry a path.
    """
    if state.kind_of(user) is not U or state.kind_of(resource) is not R:
        return False
    return resource in _reach(state, user, right)


def access_relation(state: StateDigraph, right: str) -> frozenset:
    resources = set(state.names(R))
    pairs = set()
    for u in state.names(U):
        for node in _reach(state, u, right) & resources:
            pairs.add((u, node))
    return frozenset(pairs)


def _cyclic(nodes: Iterable[str], edges: Iterable[tuple[str, str]]) -> Optional[list[str]]:
    """Return the nodes left on a cycle (Kahn's algorithm), or None if acyclic."""
    nodes = set(nodes)
    indeg = {n: 0 for n in nodes}
    succ: dict[str, list[str]] = {n: [] for n in nodes}
    for a, b in edges:
        succ[a].append(b)
        indeg[b] += 1
    queue = deque(n for n in nodes if indeg[n] == 0)
    done = 0
    while queue:
        n = queue.popleft()
        done += 1
        for m in succ[n]:
            indeg[m] -= 1
            if indeg[m] == 0:
                queue.append(m)
    if done == len(nodes):
        return None
    return sorted(n for n in nodes if indeg[n] > 0)


def dag_problems(state: StateDigraph, code: str = "cycle", where: str = "initial state") -> list[Diagnostic]:
    out = []
    for kind, label in ((EdgeKind.USER_ASSIGN, "user"), (EdgeKind.RES_ASSIGN, "resource")):
        edges = [e.pair for e in state.edges if e.kind is kind]
        nodes = {n for pair in edges for n in pair}
        stuck = _cyclic(nodes, edges)
        if stuck:
            out.append(Diagnostic(code, f"{label} DAG of the {where} has a cycle through {', '.join(stuck)}"))
    return out


def _command_problems(model: NgacModel, kinds: Mapping[str, EntityKind]) -> list[Diagnostic]:
    out = []
    seen: set[str] = set()
    for cmd in model.commands:
        if cmd.name in seen:
            out.append(Diagnostic("duplicate name", f"command name {cmd.name!r} is used more than once"))
        seen.add(cmd.name)
        if not cmd.name:
            out.append(Diagnostic("command shape", "command with an empty name"))
        edge_create = cmd.on_edges and cmd.action is Action.CREATE
        if not edge_create and cmd.conditional:
            out.append(Diagnostic(
                "command shape",
                f"{cmd.name}: only edge-create commands may carry a guard or conditions",
            ))
            continue
        if cmd.absent and cmd.guard is None:
            out.append(Diagnostic("command shape", f"{cmd.name}: conditions require a guard naming the created edge"))
        if cmd.guard is not None and cmd.guard.kind is not cmd.target:
            out.append(Diagnostic(
                "command shape",
                f"{cmd.name}: guard {cmd.guard} does not match operation type {cmd.target.value}",
            ))
        for e in ([cmd.guard] if cmd.guard is not None else []) + sorted(cmd.absent):
            problem = edge_domain_problem(e, kinds, model.rights)
            if problem is not None:
                code = "unknown entity" if "does not exist" in problem else "edge domain"
                out.append(Diagnostic(code, f"{cmd.name}: {problem}"))
    return out


def validate_model(model: NgacModel, *, strict: bool = True) -> list[Diagnostic]:
    """Well-formedness diagnostics for ``model``; returned, never raised.

    With ``strict`` (the default) create commands that disagree on the
    conditions for the same edge, or conditions that are not mirrored by the
    partner edge's creator, are errors; otherwise they are warnings.
    """
    out: list[Diagnostic] = []

    for label, verts in (("universe", model.universe), ("initial state", model.initial.vertices)):
        by_name: dict[str, set[EntityKind]] = {}
        for v in verts:
            by_name.setdefault(v.name, set()).add(v.kind)
        for name in sorted(by_name):
            if not name:
                out.append(Diagnostic("empty name", f"{label} has an entity with an empty name"))
            if len(by_name[name]) > 1:
                ks = ", ".join(sorted(k.value for k in by_name[name]))
                out.append(Diagnostic("kind overlap", f"{name!r} has several kinds in the {label}: {ks}"))
    for right in sorted(model.rights):
        if not right:
            out.append(Diagnostic("empty name", "a right has an empty name"))
        if right in model.universe_kinds:
            out.append(Diagnostic("kind overlap", f"{right!r} is both a right and an entity"))

    for v in canonical(model.initial.vertices - model.universe):
        out.append(Diagnostic("universe", f"initial vertex {v} is not in the universe"))

    kinds = model.initial.kinds
    for e in sorted(model.initial.edges):
        problem = edge_domain_problem(e, kinds, model.rights)
        if problem is not None:
            code = "missing vertex" if "does not exist" in problem else "edge domain"
            if "is not declared" in problem:
                code = "unknown right"
            out.append(Diagnostic(code, problem))
    out.extend(dag_problems(model.initial))
    out.extend(_command_problems(model, model.universe_kinds))

    if errors(out):
        return out

    from ngacsafe.safety import ModelRejected, supergraph_diagnostics

    try:
        out.extend(supergraph_diagnostics(model, strict=strict))
    except ModelRejected as exc:
        out.extend(exc.diagnostics)
    return out
