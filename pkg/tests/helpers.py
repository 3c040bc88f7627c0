"""Seeded random instance generators shared by the test modules."""

from __future__ import annotations

import itertools
import random

from ngacsafe.dacc import ConstraintGraph, DaccInstance
from ngacsafe.model import (
    Action,
    Command,
    EdgeKind,
    EntityKind,
    NgacModel,
    StateDigraph,
    Vertex,
    assoc,
    prohib,
    res_assign,
    user_assign,
)
from ngacsafe.reductions import SimpleGraph


def random_constraint_graph(rng: random.Random, max_n: int = 12) -> ConstraintGraph:
    n = rng.randint(0, max_n)
    p = rng.random()
    verts = list(range(n))
    pairs = [frozenset(e) for e in itertools.combinations(verts, 2) if rng.random() < p]
    return ConstraintGraph(frozenset(verts), frozenset(pairs))


def random_simple_graph(rng: random.Random, max_n: int = 7) -> SimpleGraph:
    n = rng.randint(1, max_n)
    p = rng.choice([0.2, 0.4, 0.6, 0.8])
    return SimpleGraph.of(range(n), [e for e in itertools.combinations(range(n), 2) if rng.random() < p])


def random_dacc(rng: random.Random, max_edges: int = 10, max_vertices: int = 7) -> DaccInstance:
    """Random DAG (edges go forward in a hidden order) with random pairwise conflicts."""
    n = rng.randint(2, max_vertices)
    names = [f"n{i}" for i in range(n)]
    rng.shuffle(names)
    possible = [(names[i], names[j]) for i in range(n) for j in range(i + 1, n)]
    edges = rng.sample(possible, min(len(possible), rng.randint(0, max_edges)))
    p = rng.choice([0.0, 0.1, 0.25, 0.5])
    conflicts = [(a, b) for a, b in itertools.combinations(edges, 2) if rng.random() < p]
    s, t = rng.sample(names, 2)
    return DaccInstance.build(names, edges, conflicts, s, t)


ALL_DESTROYS = tuple(
    Command(f"destroy_{k.value}", Action.DESTROY, k) for k in (*EntityKind, *EdgeKind)
)


def random_model(rng: random.Random, max_entities: int = 6, max_potential: int = 7) -> NgacModel:
    """Small model meeting the algorithm's assumptions.

    Conditions are added in mirrored pairs, the initial state avoids every
    conflict, and every kind has an unconditional destroy command.
    """
    users = [Vertex(f"u{i}", EntityKind.USER) for i in range(rng.randint(1, 2))]
    uas = [Vertex(f"a{i}", EntityKind.USER_ATTR) for i in range(rng.randint(1, 2))]
    ras = [Vertex("o0", EntityKind.RESOURCE_ATTR)]
    rss = [Vertex("rs0", EntityKind.RESOURCE)]
    universe = users + uas + ras + rss
    while len(universe) > max_entities:
        universe.remove(uas[-1] if len(uas) > 1 and uas[-1] in universe else users[-1])
    rights = ["r", "w"][: rng.randint(1, 2)]

    names = {v.name for v in universe}
    pool = [user_assign(u.name, a.name) for u in users for a in uas if {u.name, a.name} <= names]
    if "a0" in names and "a1" in names:
        pool.append(user_assign("a0", "a1"))
    pool += [assoc(a.name, "o0", r) for a in uas if a.name in names for r in rights]
    pool.append(res_assign("o0", "rs0"))
    if rng.random() < 0.3:
        pool.append(prohib(uas[0].name, "o0", rights[0]))
    rng.shuffle(pool)
    pool = pool[:max_potential]

    creatable = [e for e in pool if rng.random() < 0.6]
    conds = {e: set() for e in creatable}
    for e, f in itertools.combinations(pool, 2):
        if (e in conds or f in conds) and rng.random() < 0.3:
            if e in conds:
                conds[e].add(f)
            if f in conds:
                conds[f].add(e)

    present = [v for v in universe if rng.random() < 0.8]
    pnames = {v.name for v in present}
    initial_edges = set()
    for e in pool:
        if {e.src, e.dst} <= pnames and rng.random() < 0.4:
            clash = any(
                (e in conds and f in conds[e]) or (f in conds and e in conds[f]) for f in initial_edges
            )
            if not clash:
                initial_edges.add(e)

    commands = list(ALL_DESTROYS)
    for kind in EntityKind:
        if rng.random() < 0.5:
            commands.append(Command(f"create_{kind.value}", Action.CREATE, kind))
    for i, e in enumerate(sorted(creatable)):
        commands.append(Command(f"c{i}", Action.CREATE, e.kind, e, frozenset(conds[e])))
    return NgacModel(
        StateDigraph(frozenset(present), frozenset(initial_edges)),
        frozenset(rights),
        frozenset(universe),
        tuple(commands),
    )
