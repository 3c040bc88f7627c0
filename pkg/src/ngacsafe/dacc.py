"""Directed acyclic constrained connectivity.

Given a DAG, a constraint graph over its edges, and two vertices, decide whether
some conflict-free edge subset carries a directed path between them. The
solver walks the maximal independent sets of the constraint graph and runs a
breadth-first search inside each one.
"""

from __future__ import annotations

import functools
from collections import deque
from dataclasses import dataclass
from typing import Hashable, Iterable, Iterator, Optional

from ngacsafe._order import canonical, sort_key


class NotADag(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    """More maximal independent sets were needed than the caller allowed."""


def _topo_ok(vertices: frozenset, edges: frozenset) -> bool:
    indeg = {v: 0 for v in vertices}
    succ: dict = {v: [] for v in vertices}
    for a, b in edges:
        succ[a].append(b)
        indeg[b] += 1
    queue = deque(v for v, d in indeg.items() if d == 0)
    seen = 0
    while queue:
        v = queue.popleft()
        seen += 1
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    return seen == len(vertices)


@dataclass(frozen=True)
class Dag:
    vertices: frozenset
    edges: frozenset

    def __post_init__(self):
        object.__setattr__(self, "vertices", frozenset(self.vertices))
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        for a, b in self.edges:
            if a not in self.vertices or b not in self.vertices:
                raise NotADag(f"edge {(a, b)!r} has an endpoint outside the vertex set")
        if not _topo_ok(self.vertices, self.edges):
            raise NotADag("graph has a directed cycle")


@dataclass(frozen=True)
class ConstraintGraph:
    """Undirected conflict graph. Vertices are the edges of a companion graph."""

    vertices: frozenset
    conflicts: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "vertices", frozenset(self.vertices))
        pairs = set()
        for pair in self.conflicts:
            pair = frozenset(pair)
            if len(pair) != 2:
                raise ValueError(f"conflict {sorted(pair, key=sort_key)!r} is a self-loop or malformed")
            if not pair <= self.vertices:
                raise ValueError(f"conflict {canonical(pair)!r} names an unknown vertex")
            pairs.add(pair)
        object.__setattr__(self, "conflicts", frozenset(pairs))

    @functools.cached_property
    def adjacency(self) -> dict:
        adj = {v: set() for v in self.vertices}
        for pair in self.conflicts:
            a, b = tuple(pair)
            adj[a].add(b)
            adj[b].add(a)
        return {v: frozenset(n) for v, n in adj.items()}

    def neighbors(self, v) -> frozenset:
        return self.adjacency[v]

    def induced(self, keep: Iterable) -> "ConstraintGraph":
        keep = frozenset(keep) & self.vertices
        return ConstraintGraph(keep, frozenset(p for p in self.conflicts if p <= keep))

    def is_independent(self, subset: Iterable) -> bool:
        subset = frozenset(subset)
        return all(not (pair <= subset) for pair in self.conflicts)


@dataclass(frozen=True)
class DaccInstance:
    dag: Dag
    constraints: ConstraintGraph
    source: Hashable
    target: Hashable

    def __post_init__(self):
        if self.source == self.target:
            raise ValueError("source and target must differ")
        for name, v in (("source", self.source), ("target", self.target)):
            if v not in self.dag.vertices:
                raise ValueError(f"{name} {v!r} is not a DAG vertex")
        if self.constraints.vertices != self.dag.edges:
            raise ValueError("constraint graph vertices must be exactly the DAG edges")

    @classmethod
    def build(cls, vertices, edges, conflicts, source, target) -> "DaccInstance":
        dag = Dag(frozenset(vertices), frozenset(tuple(e) for e in edges))
        pairs = frozenset(frozenset((tuple(a), tuple(b))) for a, b in conflicts)
        return cls(dag, ConstraintGraph(dag.edges, pairs), source, target)


@dataclass(frozen=True)
class DaccVerdict:
    reachable: bool
    witness_path: Optional[tuple] = None
    witness_edges: Optional[frozenset] = None
    mis_examined: int = 0


def is_valid_subgraph(instance: DaccInstance, edge_subset: Iterable) -> bool:
    subset = frozenset(tuple(e) for e in edge_subset)
    unknown = subset - instance.dag.edges
    if unknown:
        raise ValueError(f"edges not in the DAG: {canonical(unknown)!r}")
    return instance.constraints.is_independent(subset)


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _mis_masks(adj: list[int]) -> Iterator[int]:
    # Reverse search over prefixes G_0 ⊂ G_1 ⊂ ... ⊂ G_n: every MIS of G_i has at
    # least one child MIS in G_{i+1}, so each leaf at depth n is reached after
    # O(n) polynomial-cost steps.
    n = len(adj)
    stack = [(0, 0)]
    while stack:
        mis, i = stack.pop()
        if i == n:
            yield mis
            continue
        bit = 1 << i
        nbrs = adj[i] & (bit - 1)
        if not mis & nbrs:
            stack.append((mis | bit, i + 1))
            continue
        moved = (mis & ~nbrs) | bit
        children = [(mis, i + 1)]
        if _maximal(moved, adj, i + 1) and _greedy_completion(moved & ~bit, adj, i) == mis:
            children.append((moved, i + 1))
        stack.extend(reversed(children))


def _maximal(mask: int, adj: list[int], size: int) -> bool:
    covered = mask
    for v in _bits(mask):
        covered |= adj[v]
    full = (1 << size) - 1
    return covered & full == full


def _greedy_completion(mask: int, adj: list[int], size: int) -> int:
    for j in range(size):
        if not (mask >> j) & 1 and not adj[j] & mask:
            mask |= 1 << j
    return mask


def enumerate_mis(graph: ConstraintGraph) -> Iterator[frozenset]:
    """Yield every maximal independent set of ``graph`` exactly once.

    Polynomial delay; the order is fixed by the canonical vertex order, so runs
    are reproducible regardless of hash seeds.
    """
    order = canonical(graph.vertices)
    index = {v: i for i, v in enumerate(order)}
    adj = [0] * len(order)
    for pair in graph.conflicts:
        a, b = (index[x] for x in pair)
        adj[a] |= 1 << b
        adj[b] |= 1 << a
    for mask in _mis_masks(adj):
        yield frozenset(order[i] for i in _bits(mask))


def st_path(dag: Dag, source, target, allowed_edges: Iterable) -> Optional[tuple]:
    """Breadth-first search for a source→target path over ``allowed_edges`` only."""
    if source == target:
        return (source,)
    succ: dict = {}
    for a, b in allowed_edges:
        succ.setdefault(a, []).append(b)
    parent = {source: None}
    queue = deque([source])
    while queue:
        node = queue.popleft()
        for nxt in sorted(succ.get(node, ()), key=sort_key):
            if nxt in parent:
                continue
            parent[nxt] = node
            if nxt == target:
                path = [nxt]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return tuple(reversed(path))
            queue.append(nxt)
    return None


def solve_dacc(instance: DaccInstance, *, max_mis: Optional[int] = None) -> DaccVerdict:
    """Decide reachability over valid subgraphs by scanning maximal independent sets.

    Stops at the first maximal independent set whose edges connect source to
    target; a bigger valid subgraph never loses a path, so maximal sets suffice.
    """
    examined = 0
    for mis in enumerate_mis(instance.constraints):
        examined += 1
        if max_mis is not None and examined > max_mis:
            raise BudgetExceeded(f"more than {max_mis} maximal independent sets")
        path = st_path(instance.dag, instance.source, instance.target, mis)
        if path is not None:
            return DaccVerdict(True, path, mis, examined)
    return DaccVerdict(False, mis_examined=examined)


def path_edges(path: Iterable) -> list[tuple]:
    path = list(path)
    return list(zip(path, path[1:]))
