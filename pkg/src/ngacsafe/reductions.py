"""Instance transformers from the hardness constructions, plus worst-case generators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Optional, Sequence

from ngacsafe.dacc import ConstraintGraph, Dag, DaccInstance
from ngacsafe.model import (
    Action,
    Command,
    EdgeKind,
    EntityKind,
    NgacModel,
    StateDigraph,
    Vertex,
    assoc,
    res_assign,
    user_assign,
)

COLORS = ("R", "G", "B")


@dataclass(frozen=True)
class SimpleGraph:
    """Undirected graph; ``vertices`` keeps input order."""

    vertices: tuple
    edges: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex")
        known = set(self.vertices)
        pairs = set()
        for e in self.edges:
            e = frozenset(e)
            if len(e) != 2:
                raise ValueError(f"self-loop or malformed edge {sorted(e)!r}")
            if not e <= known:
                raise ValueError(f"edge {sorted(e)!r} names an unknown vertex")
            pairs.add(e)
        object.__setattr__(self, "edges", frozenset(pairs))

    @classmethod
    def of(cls, vertices: Iterable, edges: Iterable = ()) -> "SimpleGraph":
        return cls(tuple(vertices), frozenset(frozenset(e) for e in edges))


def complete_graph(n: int) -> SimpleGraph:
    return SimpleGraph.of(range(n), [(i, j) for i in range(n) for j in range(i + 1, n)])


def cycle_graph(n: int) -> SimpleGraph:
    return SimpleGraph.of(range(n), [(i, (i + 1) % n) for i in range(n)])


def petersen_graph() -> SimpleGraph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return SimpleGraph.of(range(10), outer + spokes + inner)


def _fresh(name: str, taken: set) -> str:
    while name in taken:
        name = "_" + name
    taken.add(name)
    return name


def color_node(v: Hashable, color: str) -> str:
    return f"{v}_{color}"


def reduce_3col_to_dacc(g: SimpleGraph) -> DaccInstance:
    """Layered DAG s → v1 → {R1,G1,B1} → v2 → ... → t whose valid paths are proper colorings."""
    names = [str(v) for v in g.vertices]
    if len(set(names)) != len(names):
        raise ValueError("vertex names collide once converted to strings")
    taken = set(names) | {color_node(n, c) for n in names for c in COLORS}
    if len(taken) != 4 * len(names):
        raise ValueError("color node names collide with graph vertex names")
    s, t = _fresh("s", taken), _fresh("t", taken)

    vertices = {s, t}
    edges = []
    prev = [s]
    for n in names:
        vertices.add(n)
        edges.extend((p, n) for p in prev)
        prev = []
        for c in COLORS:
            cn = color_node(n, c)
            vertices.add(cn)
            edges.append((n, cn))
            prev.append(cn)
    edges.extend((p, t) for p in prev)

    conflicts = set()
    for n in names:
        picks = [(n, color_node(n, c)) for c in COLORS]
        conflicts.update(frozenset((a, b)) for i, a in enumerate(picks) for b in picks[i + 1:])
    pos = {v: str(v) for v in g.vertices}
    for e in g.edges:
        a, b = (pos[v] for v in e)
        for c in COLORS:
            conflicts.add(frozenset(((a, color_node(a, c)), (b, color_node(b, c)))))

    dag = Dag(frozenset(vertices), frozenset(edges))
    return DaccInstance(dag, ConstraintGraph(dag.edges, frozenset(conflicts)), s, t)


def coloring_from_path(g: SimpleGraph, path: Sequence[str]) -> dict:
    """Read the color choice of every graph vertex off an s→t path of the reduced DAG."""
    by_name = {str(v): v for v in g.vertices}
    out = {}
    for a, b in zip(path, path[1:]):
        if a in by_name:
            for c in COLORS:
                if b == color_node(a, c):
                    out[by_name[a]] = c
    return out


@dataclass(frozen=True)
class CospNames:
    user: str
    resource: str
    resource_attr: str
    right: str


def reduce_dacc_to_cosp(inst: DaccInstance, names: Optional[CospNames] = None) -> NgacModel:
    """Embed a DACC instance in the user DAG of a one-user, one-resource model.

    Each DAG edge gets one guarded create whose conditions list every conflict
    partner of that edge, so reachable user-DAG states are exactly the valid
    subgraphs.
    """
    taken = {str(v) for v in inst.dag.vertices}
    if len(taken) != len(inst.dag.vertices):
        raise ValueError("DAG vertex names collide once converted to strings")
    if names is None:
        names = CospNames(_fresh("u", taken), _fresh("rs", taken), _fresh("rsa", taken), _fresh("r", taken))
    ua = sorted(str(v) for v in inst.dag.vertices)
    src, dst = str(inst.source), str(inst.target)

    vertices = {Vertex(names.user, EntityKind.USER), Vertex(names.resource, EntityKind.RESOURCE),
                Vertex(names.resource_attr, EntityKind.RESOURCE_ATTR)}
    vertices |= {Vertex(n, EntityKind.USER_ATTR) for n in ua}
    initial = StateDigraph.build(vertices, [
        user_assign(names.user, src),
        res_assign(names.resource_attr, names.resource),
        assoc(dst, names.resource_attr, names.right),
    ])

    def edge(pair):
        return user_assign(str(pair[0]), str(pair[1]))

    commands = [Command(f"destroy_{k.value}", Action.DESTROY, k) for k in (*EntityKind, *_EDGE_KINDS)]
    commands += [Command(f"create_{k.value}", Action.CREATE, k) for k in EntityKind]
    cg = inst.constraints
    for i, pair in enumerate(sorted(inst.dag.edges, key=lambda p: (str(p[0]), str(p[1])))):
        e = edge(pair)
        partners = frozenset(edge(p) for p in cg.neighbors(pair))
        commands.append(Command(f"create_{i}:{e.src}->{e.dst}", Action.CREATE, EdgeKind.USER_ASSIGN, e, partners))
    return NgacModel(initial, frozenset({names.right}), frozenset(vertices), tuple(commands))


_EDGE_KINDS = (EdgeKind.USER_ASSIGN, EdgeKind.RES_ASSIGN, EdgeKind.ASSOC)


def gen_disjoint_triangles(k: int) -> ConstraintGraph:
    if k < 0:
        raise ValueError("k must be non-negative")
    verts = [f"t{i}.{j}" for i in range(k) for j in range(3)]
    conflicts = set()
    for i in range(k):
        a, b, c = (f"t{i}.{j}" for j in range(3))
        conflicts |= {frozenset((a, b)), frozenset((b, c)), frozenset((a, c))}
    return ConstraintGraph(frozenset(verts), frozenset(conflicts))


def gen_mutex_groups_model(users: int, groups: Sequence[int], right: str = "read") -> NgacModel:
    """Users who may each hold at most one attribute per group.

    Each assignment of a user into a group is created by a command that requires
    the user's other assignments in that group to be absent, so every
    (user, group) pair yields an isolated clique in the constraint graph. The
    only association hangs off an ``admin`` attribute nobody can acquire, so the
    model is safe and every tuple scans the full set of maximal independent sets.
    """
    if users < 0:
        raise ValueError("users must be non-negative")
    if any(size < 2 for size in groups):
        raise ValueError("group sizes must be at least 2")
    user_names = [f"u{i}" for i in range(users)]
    attrs = [[f"g{j}.a{i}" for i in range(size)] for j, size in enumerate(groups)]
    vertices = {Vertex(u, EntityKind.USER) for u in user_names}
    vertices |= {Vertex(a, EntityKind.USER_ATTR) for grp in attrs for a in grp}
    vertices |= {Vertex("admin", EntityKind.USER_ATTR), Vertex("records", EntityKind.RESOURCE_ATTR),
                 Vertex("rs", EntityKind.RESOURCE)}
    initial = StateDigraph.build(vertices, [assoc("admin", "records", right), res_assign("records", "rs")])

    commands = [Command(f"destroy_{k.value}", Action.DESTROY, k) for k in (*EntityKind, *_EDGE_KINDS)]
    for u in user_names:
        for grp in attrs:
            for a in grp:
                others = frozenset(user_assign(u, b) for b in grp if b != a)
                commands.append(Command(f"assign_{u}_{a}", Action.CREATE, EdgeKind.USER_ASSIGN, user_assign(u, a), others))
    return NgacModel(initial, frozenset({right}), frozenset(vertices), tuple(commands))


def mutex_cliques(cg: ConstraintGraph) -> Mapping[int, int]:
    """Histogram of connected-component sizes among vertices that have conflicts."""
    seen = set()
    sizes: dict[int, int] = {}
    for v in cg.vertices:
        if v in seen or not cg.neighbors(v):
            continue
        stack, comp = [v], 0
        seen.add(v)
        while stack:
            x = stack.pop()
            comp += 1
            for y in cg.neighbors(x):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        sizes[comp] = sizes.get(comp, 0) + 1
    return sizes
