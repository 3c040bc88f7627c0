"""Brute-force reference implementations. Exponential on purpose; tests only.

None of these call into the dacc or safety modules. Command semantics come
from ``model.execute_command`` since that is the definition being explored.
"""

from __future__ import annotations

import itertools
import os
from collections import deque
from typing import Iterable, Optional

from ngacsafe.model import (
    Action,
    Edge,
    EdgeKind,
    EntityKind,
    NgacModel,
    StateDigraph,
    Vertex,
    execute_command,
)

DEFAULT_LIMITS = {
    "mis": 20,
    "dacc": 20,
    "3col": 15,
    "safety-entities": 8,
    "safety-edges": 20,
    "safety-states": 200_000,
}


class SizeGuardError(RuntimeError):
    pass


def limit(name: str) -> int:
    """Size limit for oracle ``name``; NGACSAFE_SIZE_GUARD may override it.

    The variable is either one integer applied to every oracle or a comma list
    such as ``mis=24,3col=16``.
    """
    raw = os.environ.get("NGACSAFE_SIZE_GUARD", "").strip()
    if raw:
        if raw.isdigit():
            return int(raw)
        for part in raw.split(","):
            key, _, value = part.partition("=")
            if key.strip() == name and value.strip().isdigit():
                return int(value)
    return DEFAULT_LIMITS[name]


def _guard(name: str, size: int) -> None:
    cap = limit(name)
    if size > cap:
        raise SizeGuardError(f"{name} oracle limited to {cap}, got {size}")


def brute_force_mis(graph) -> set:
    """All maximal independent sets by testing every vertex subset."""
    verts = sorted(graph.vertices, key=repr)
    _guard("mis", len(verts))
    n = len(verts)
    idx = {v: i for i, v in enumerate(verts)}
    nb = [0] * n
    for pair in graph.conflicts:
        a, b = (idx[x] for x in pair)
        nb[a] |= 1 << b
        nb[b] |= 1 << a
    out = set()
    for mask in range(1 << n):
        members = [i for i in range(n) if mask >> i & 1]
        if any(nb[i] & mask for i in members):
            continue
        if all(nb[j] & mask for j in range(n) if not mask >> j & 1):
            out.add(frozenset(verts[i] for i in members))
    return out


def _connected(edges: Iterable, source, target) -> bool:
    reached = {source}
    changed = True
    edges = list(edges)
    while changed:
        changed = False
        for a, b in edges:
            if a in reached and b not in reached:
                reached.add(b)
                changed = True
    return target in reached


def brute_force_dacc(inst) -> bool:
    """Any conflict-free edge subset with a source→target path?"""
    edges = sorted(inst.dag.edges, key=repr)
    _guard("dacc", len(edges))
    pairs = [tuple(p) for p in inst.constraints.conflicts]
    for r in range(len(edges) + 1):
        for subset in itertools.combinations(edges, r):
            chosen = set(subset)
            if any(a in chosen and b in chosen for a, b in pairs):
                continue
            if _connected(chosen, inst.source, inst.target):
                return True
    return False


def brute_force_3col(g) -> bool:
    verts = list(g.vertices)
    _guard("3col", len(verts))
    edges = [tuple(e) for e in g.edges]
    for colors in itertools.product(range(3), repeat=len(verts)):
        phi = dict(zip(verts, colors))
        if all(phi[a] != phi[b] for a, b in edges):
            return True
    return False


def proper_coloring(g, phi: dict) -> bool:
    return set(phi) == set(g.vertices) and all(phi[a] != phi[b] for a, b in (tuple(e) for e in g.edges))


def brute_force_access(state: StateDigraph, right: str) -> frozenset:
    """(user, resource) pairs joined by some simple path through a ``right`` association.

    Enumerates simple paths over every non-prohibition edge.
    """
    kind = {v.name: v.kind for v in state.vertices}
    succ: dict[str, list[Edge]] = {}
    for e in state.edges:
        if e.kind is not EdgeKind.PROHIB:
            succ.setdefault(e.src, []).append(e)
    found = set()

    def walk(node, start, visited, via_right):
        if kind.get(node) is EntityKind.RESOURCE and via_right:
            found.add((start, node))
        for e in succ.get(node, ()):
            if e.dst in visited:
                continue
            hit = via_right or (e.kind is EdgeKind.ASSOC and e.label == right)
            if e.kind is EdgeKind.ASSOC and e.label != right:
                continue
            walk(e.dst, start, visited | {e.dst}, hit)

    for v in state.vertices:
        if v.kind is EntityKind.USER:
            walk(v.name, v.name, {v.name}, False)
    return frozenset(found)


def _all_access(state: StateDigraph, rights) -> frozenset:
    return frozenset((u, rs, r) for r in rights for u, rs in brute_force_access(state, r))


def _domain_edges(kind: EdgeKind, kinds: dict, rights) -> list[Edge]:
    src_ok = {
        EdgeKind.USER_ASSIGN: (EntityKind.USER, EntityKind.USER_ATTR),
        EdgeKind.RES_ASSIGN: (EntityKind.RESOURCE_ATTR,),
        EdgeKind.ASSOC: (EntityKind.USER_ATTR,),
        EdgeKind.PROHIB: (EntityKind.USER_ATTR,),
    }[kind]
    dst_ok = {
        EdgeKind.USER_ASSIGN: (EntityKind.USER_ATTR,),
        EdgeKind.RES_ASSIGN: (EntityKind.RESOURCE, EntityKind.RESOURCE_ATTR),
        EdgeKind.ASSOC: (EntityKind.RESOURCE_ATTR,),
        EdgeKind.PROHIB: (EntityKind.RESOURCE_ATTR,),
    }[kind]
    labels = sorted(rights) if kind in (EdgeKind.ASSOC, EdgeKind.PROHIB) else [None]
    return [
        Edge(kind, a, b, lab)
        for a in sorted(n for n, k in kinds.items() if k in src_ok)
        for b in sorted(n for n, k in kinds.items() if k in dst_ok)
        for lab in labels
    ]


def _arguments(model: NgacModel, state: StateDigraph, cmd) -> list:
    if cmd.guard is not None:
        return [cmd.guard]
    if isinstance(cmd.target, EntityKind):
        pool = model.universe if cmd.action is Action.CREATE else state.vertices
        return sorted((v for v in pool if v.kind is cmd.target), key=lambda v: v.name)
    if cmd.action is Action.DESTROY:
        return sorted(e for e in state.edges if e.kind is cmd.target)
    return _domain_edges(cmd.target, {v.name: v.kind for v in state.vertices}, model.rights)


def potential_edge_count(model: NgacModel) -> int:
    pool = set(model.initial.edges)
    ukinds = {v.name: v.kind for v in model.universe}
    for c in model.commands:
        if c.action is Action.CREATE and isinstance(c.target, EdgeKind):
            if c.guard is not None:
                pool.add(c.guard)
            else:
                pool.update(_domain_edges(c.target, ukinds, model.rights))
    return len(pool)


def explore(model: NgacModel) -> dict[StateDigraph, Optional[tuple]]:
    """Breadth-first map from each reachable state to (parent state, command, argument)."""
    _guard("safety-entities", len(model.universe | model.initial.vertices))
    _guard("safety-edges", potential_edge_count(model))
    cap = limit("safety-states")
    commands = sorted(model.commands, key=lambda c: c.name)
    parent: dict[StateDigraph, Optional[tuple]] = {model.initial: None}
    queue = deque([model.initial])
    while queue:
        state = queue.popleft()
        for cmd in commands:
            for arg in _arguments(model, state, cmd):
                nxt = execute_command(state, cmd, arg, universe=model.universe, rights=model.rights)
                if nxt not in parent:
                    parent[nxt] = (state, cmd, arg)
                    if len(parent) > cap:
                        raise SizeGuardError(f"more than {cap} reachable states")
                    queue.append(nxt)
    return parent


def reachable_states(model: NgacModel) -> frozenset:
    return frozenset(explore(model))


def brute_force_safety(model: NgacModel, *, all_potential: bool = True):
    """Search every reachable state for an access triple that did not hold initially.

    ``all_potential=False`` only counts users and resources present initially.
    Returns a SafetyVerdict whose witness is a shortest command sequence.
    """
    from ngacsafe.safety import SafetyVerdict, Witness

    parent = explore(model)
    before = _all_access(model.initial, model.rights)
    users = {v.name for v in model.initial.vertices if v.kind is EntityKind.USER}
    resources = {v.name for v in model.initial.vertices if v.kind is EntityKind.RESOURCE}
    for state in parent:
        fresh = _all_access(state, model.rights) - before
        if not all_potential:
            fresh = {t for t in fresh if t[0] in users and t[1] in resources}
        if fresh:
            u, rs, r = min(fresh)
            seq = []
            cur = state
            while parent[cur] is not None:
                prev, cmd, arg = parent[cur]
                seq.append((cmd, arg))
                cur = prev
            return SafetyVerdict(False, Witness(u, rs, r, tuple(reversed(seq))))
    return SafetyVerdict(True, None)


def valid_subgraphs(vertices: Iterable[Vertex], edges: Iterable[Edge], conflicts: Iterable) -> frozenset:
    """Every (vertex subset, edge subset) whose edges have endpoints inside and avoid all conflicts."""
    verts = sorted(vertices, key=lambda v: v.name)
    edges = sorted(edges)
    pairs = [tuple(p) for p in conflicts]
    out = set()
    for r in range(len(verts) + 1):
        for vs in itertools.combinations(verts, r):
            names = {v.name for v in vs}
            usable = [e for e in edges if e.src in names and e.dst in names]
            for mask in range(1 << len(usable)):
                chosen = {usable[i] for i in range(len(usable)) if mask >> i & 1}
                if any(a in chosen and b in chosen for a, b in pairs):
                    continue
                out.add(StateDigraph(frozenset(vs), frozenset(chosen)))
    return frozenset(out)
