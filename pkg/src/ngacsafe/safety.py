"""Safety decision for NGAC models.

The supergraph holds everything any create command could ever add; the
constraint graph turns edge-create conditions into pairwise conflicts. A model
is unsafe when, for some user, resource and right with no initial access, a
conflict-free subgraph of the supergraph carries an access path.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from ngacsafe._order import canonical
from ngacsafe.dacc import ConstraintGraph, Dag, DaccInstance, DaccVerdict, solve_dacc
from ngacsafe.model import (
    EDGE_DOMAINS,
    Action,
    Command,
    Diagnostic,
    Edge,
    EdgeKind,
    EntityKind,
    NgacModel,
    StateDigraph,
    Vertex,
    access_holds,
    dag_problems,
    edge_domain_problem,
    errors,
    execute_command,
    replay,
    validate_model,
)

Supergraph = StateDigraph


class ModelRejected(ValueError):
    def __init__(self, diagnostics: Iterable[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


class InvalidTarget(ValueError):
    """The requested target state is not a valid subgraph of the supergraph."""


@dataclass(frozen=True)
class Witness:
    user: str
    resource: str
    right: str
    sequence: tuple = ()


@dataclass(frozen=True)
class SafetyStats:
    tuples_checked: int = 0
    mis_enumerated: int = 0
    max_mis_per_tuple: int = 0
    elapsed_ms: float = 0.0


@dataclass(frozen=True)
class SafetyVerdict:
    safe: bool
    witness: Optional[Witness] = None
    stats: SafetyStats = field(default_factory=SafetyStats)


def candidate_edges(kind: EdgeKind, kinds: Mapping[str, EntityKind], rights: Iterable[str]) -> list[Edge]:
    """Every edge of ``kind`` whose endpoints fit its domain among ``kinds``."""
    src_kinds, dst_kinds = EDGE_DOMAINS[kind]
    srcs = sorted(n for n, k in kinds.items() if k in src_kinds)
    dsts = sorted(n for n, k in kinds.items() if k in dst_kinds)
    labels = sorted(rights) if kind.labeled else [None]
    return [Edge(kind, a, b, lab) for a in srcs for b in dsts for lab in labels]


def _raw_supergraph(model: NgacModel) -> StateDigraph:
    vertices = set(model.initial.vertices)
    for cmd in model.commands:
        if cmd.action is Action.CREATE and not cmd.on_edges:
            vertices.update(v for v in model.universe if v.kind is cmd.target)
    kinds = {v.name: v.kind for v in vertices}
    edges = set(model.initial.edges)
    for cmd in model.commands:
        if cmd.action is not Action.CREATE or not cmd.on_edges:
            continue
        pool = [cmd.guard] if cmd.guard is not None else candidate_edges(cmd.target, kinds, model.rights)
        edges.update(e for e in pool if edge_domain_problem(e, kinds, model.rights) is None)
    return StateDigraph(frozenset(vertices), frozenset(edges))


def build_supergraph(model: NgacModel) -> Supergraph:
    """Initial state plus everything the create commands could add, conditions ignored."""
    sg = _raw_supergraph(model)
    problems = dag_problems(sg, code="supergraph cycle", where="supergraph")
    if problems:
        raise ModelRejected(problems)
    return sg


def edge_creators(model: NgacModel, sg: Supergraph) -> dict[Edge, list[tuple[Command, frozenset]]]:
    """Map each creatable supergraph edge to its create commands and their live conditions.

    Conditions naming edges outside the supergraph can never be violated and
    are dropped.
    """
    out: dict[Edge, list[tuple[Command, frozenset]]] = {}
    kinds = sg.kinds
    for cmd in model.commands:
        if cmd.action is not Action.CREATE or not cmd.on_edges:
            continue
        if cmd.guard is not None:
            produced = [cmd.guard] if cmd.guard in sg.edges else []
        else:
            produced = [e for e in candidate_edges(cmd.target, kinds, model.rights) if e in sg.edges]
        live = frozenset(e for e in cmd.absent if e in sg.edges)
        for e in produced:
            out.setdefault(e, []).append((cmd, live - {e}))
    return out


def _effective_conditions(creators: Mapping[Edge, list]) -> dict[Edge, frozenset]:
    return {e: frozenset.intersection(*(conds for _, conds in lst)) for e, lst in creators.items()}


def build_constraint_graph(model: NgacModel, sg: Supergraph) -> ConstraintGraph:
    """Conflict graph over the supergraph edges: {e, f} when creating e requires f absent.

    With several create commands for one edge only conditions shared by all of
    them become conflicts.
    """
    effective = _effective_conditions(edge_creators(model, sg))
    pairs = {frozenset((e, f)) for e, conds in effective.items() for f in conds}
    return ConstraintGraph(sg.edges, frozenset(pairs))


def supergraph_diagnostics(model: NgacModel, *, strict: bool = True) -> list[Diagnostic]:
    """Checks that keep valid subgraphs and reachable states in exact correspondence."""
    sg = build_supergraph(model)
    out: list[Diagnostic] = []
    creators = edge_creators(model, sg)
    lenient = "error" if strict else "warning"
    for e in sorted(creators):
        lst = creators[e]
        if len(lst) < 2:
            continue
        names = ", ".join(c.name for c, _ in lst)
        if len({conds for _, conds in lst}) > 1:
            out.append(Diagnostic(
                "conflicting creates",
                f"{e} is created by commands with different conditions ({names}); "
                "only their common conditions become constraints",
                lenient,
            ))
        else:
            out.append(Diagnostic("duplicate create", f"{e} is created by several commands ({names})", "warning"))

    effective = _effective_conditions(creators)
    for e in sorted(effective):
        for f in sorted(effective[e]):
            if f in effective and e not in effective[f]:
                out.append(Diagnostic(
                    "asymmetric condition",
                    f"creating {e} requires {f} absent, but creating {f} does not require {e} absent",
                    lenient,
                ))

    cg = build_constraint_graph(model, sg)
    init = model.initial.edges
    for pair in canonical(cg.conflicts):
        if pair <= init:
            a, b = sorted(pair)
            out.append(Diagnostic("initial conflict", f"initial state holds conflicting edges {a} and {b}"))

    destroyable = {c.target for c in model.commands if c.action is Action.DESTROY}
    present = {v.kind for v in sg.vertices} | {e.kind for e in sg.edges}
    for kind in sorted(present - destroyable, key=lambda k: k.value):
        out.append(Diagnostic(
            "missing destroy",
            f"no unconditional destroy command for {kind.value}; unsafe verdicts may not be realisable",
            "warning",
        ))
    return out


def restrict_to_right(sg: Supergraph, right: str) -> Dag:
    """The supergraph without prohibitions and without associations for other rights."""
    return Dag(frozenset(v.name for v in sg.vertices), frozenset(e.pair for e in _right_edges(sg, right)))


def _right_edges(sg: StateDigraph, right: str) -> list[Edge]:
    keep = []
    for e in sg.edges:
        if e.kind is EdgeKind.PROHIB:
            continue
        if e.kind is EdgeKind.ASSOC and e.label != right:
            continue
        keep.append(e)
    return keep


@dataclass(frozen=True)
class _RightProblem:
    dag: Dag
    constraints: ConstraintGraph
    edge_of: Mapping[tuple, Edge]


def _right_problem(sg: Supergraph, cg: ConstraintGraph, right: str) -> _RightProblem:
    kept = _right_edges(sg, right)
    edge_of = {e.pair: e for e in kept}
    dag = restrict_to_right(sg, right)
    conflicts = set()
    for pair in cg.conflicts:
        a, b = tuple(pair)
        if a.pair in edge_of and b.pair in edge_of and edge_of[a.pair] == a and edge_of[b.pair] == b:
            conflicts.add(frozenset((a.pair, b.pair)))
    return _RightProblem(dag, ConstraintGraph(dag.edges, frozenset(conflicts)), edge_of)


def _creatable_steps(model: NgacModel, item) -> list[Command]:
    cmds = []
    for c in sorted(model.commands, key=lambda c: c.name):
        if c.action is not Action.CREATE or c.target is not item.kind:
            continue
        if isinstance(item, Edge) and c.guard is not None and c.guard != item:
            continue
        cmds.append(c)
    # commands naming the exact edge first
    return sorted(cmds, key=lambda c: (c.guard is None, c.name))


def _destroyer(model: NgacModel, kind) -> Optional[Command]:
    for c in sorted(model.commands, key=lambda c: c.name):
        if c.action is Action.DESTROY and c.target is kind:
            return c
    return None


def reconstruct_command_sequence(
    model: NgacModel,
    target: StateDigraph,
    *,
    supergraph: Optional[Supergraph] = None,
    constraints: Optional[ConstraintGraph] = None,
) -> list[tuple[Command, object]]:
    """Commands that take the initial state to exactly ``target``.

    Destroys of initial elements missing from ``target`` come first, then
    vertex creates, then edge creates.
    """
    sg = build_supergraph(model) if supergraph is None else supergraph
    cg = build_constraint_graph(model, sg) if constraints is None else constraints
    if not target.vertices <= sg.vertices or not target.edges <= sg.edges:
        raise InvalidTarget("target is not a subgraph of the supergraph")
    for e in target.edges:
        if e.src not in target.kinds or e.dst not in target.kinds:
            raise InvalidTarget(f"target edge {e} has an endpoint outside the target")
    if not cg.is_independent(target.edges):
        raise InvalidTarget("target edges violate the constraint graph")

    init = model.initial
    seq: list[tuple[Command, object]] = []
    state = init

    def run(cmd: Command, arg) -> StateDigraph:
        return execute_command(state, cmd, arg, universe=model.universe, rights=model.rights)

    doomed_vertices = init.vertices - target.vertices
    doomed_edges = [
        e for e in sorted(init.edges - target.edges)
        if e.src not in {v.name for v in doomed_vertices} and e.dst not in {v.name for v in doomed_vertices}
    ]
    for item in doomed_edges + canonical(doomed_vertices):
        cmd = _destroyer(model, item.kind)
        if cmd is None:
            raise InvalidTarget(f"no destroy command for {item.kind.value}; cannot remove {item}")
        state = run(cmd, item)
        seq.append((cmd, item))

    for item in canonical(target.vertices - init.vertices) + sorted(target.edges - init.edges):
        for cmd in _creatable_steps(model, item):
            nxt = run(cmd, item)
            if nxt != state:
                state = nxt
                seq.append((cmd, item))
                break
        else:
            raise InvalidTarget(f"no create command can add {item} at this point")

    if state != target:
        raise InvalidTarget("replay does not reproduce the target state")
    return seq


def verify_unsafety_certificate(model: NgacModel, user: str, resource: str, right: str, sequence) -> bool:
    """Check a (tuple, command sequence) certificate by replay.

    Steps naming commands outside the model or with ill-typed arguments are no-ops.
    """
    if access_holds(model.initial, user, right, resource):
        return False
    state = model.initial
    for cmd, arg in sequence:
        if cmd not in model.commands:
            continue
        try:
            state = execute_command(state, cmd, arg, universe=model.universe, rights=model.rights)
        except TypeError:
            continue
    return access_holds(state, user, right, resource)


def _minimize(model: NgacModel, witness: Witness) -> Witness:
    seq = list(witness.sequence)
    i = 0
    while i < len(seq):
        trial = seq[:i] + seq[i + 1:]
        if verify_unsafety_certificate(model, witness.user, witness.resource, witness.right, trial):
            seq = trial
        else:
            i += 1
    return Witness(witness.user, witness.resource, witness.right, tuple(seq))


def _witness(model, sg, cg, problem: _RightProblem, verdict: DaccVerdict, user, resource, right) -> Witness:
    path = [problem.edge_of[p] for p in zip(verdict.witness_path, verdict.witness_path[1:])]
    init = model.initial
    created = [e for e in path if e not in init.edges]
    doomed = {f for e in created for f in cg.neighbors(e)} & init.edges
    names = set(verdict.witness_path)
    target = StateDigraph(
        init.vertices | {v for v in sg.vertices if v.name in names},
        (init.edges - doomed) | frozenset(path),
    )
    try:
        seq = reconstruct_command_sequence(model, target, supergraph=sg, constraints=cg)
    except InvalidTarget as exc:
        raise ModelRejected([Diagnostic("unrealisable witness", str(exc))]) from exc
    w = _minimize(model, Witness(user, resource, right, tuple(seq)))
    if not verify_unsafety_certificate(model, user, resource, right, w.sequence):
        raise ModelRejected([Diagnostic(
            "unrealisable witness",
            f"constraint-valid path for ({user}, {resource}, {right}) does not replay",
        )])
    return w


def candidate_tuples(model: NgacModel, sg: Supergraph, all_potential: bool = False) -> list[tuple[str, str, str]]:
    base = sg if all_potential else model.initial
    out = []
    for u, rs, r in itertools.product(base.names(EntityKind.USER), base.names(EntityKind.RESOURCE), sorted(model.rights)):
        if not access_holds(model.initial, u, r, rs):
            out.append((u, rs, r))
    return out


def _solve_tuple(args) -> DaccVerdict:
    problem, user, resource, max_mis = args
    inst = DaccInstance(problem.dag, problem.constraints, user, resource)
    return solve_dacc(inst, max_mis=max_mis)


def check_safety(
    model: NgacModel,
    *,
    all_potential: bool = False,
    strict: bool = True,
    jobs: int = 1,
    max_mis: Optional[int] = None,
) -> SafetyVerdict:
    """Decide whether any command sequence creates a new access.

    Tuples (user, resource, right) are tried in lexicographic order; the first
    unsafe one is reported with a replayable command sequence. ``all_potential``
    also tries users and resources that only commands could create.
    """
    started = time.perf_counter()
    problems = errors(validate_model(model, strict=strict))
    if problems:
        raise ModelRejected(problems)
    sg = build_supergraph(model)
    cg = build_constraint_graph(model, sg)
    tuples = candidate_tuples(model, sg, all_potential)
    problems_by_right = {r: _right_problem(sg, cg, r) for r in sorted(model.rights)}
    jobs_in = [(problems_by_right[r], u, rs, max_mis) for u, rs, r in tuples]

    if jobs > 1 and len(jobs_in) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            verdicts = list(pool.map(_solve_tuple, jobs_in, chunksize=max(1, len(jobs_in) // (4 * jobs))))
    else:
        verdicts = []
        for item in jobs_in:
            verdicts.append(_solve_tuple(item))
            if verdicts[-1].reachable:
                break

    witness = None
    for (u, rs, r), v in zip(tuples, verdicts):
        if v.reachable:
            witness = _witness(model, sg, cg, problems_by_right[r], v, u, rs, r)
            break
    counts = [v.mis_examined for v in verdicts]
    stats = SafetyStats(
        tuples_checked=len(verdicts),
        mis_enumerated=sum(counts),
        max_mis_per_tuple=max(counts, default=0),
        elapsed_ms=(time.perf_counter() - started) * 1000.0,
    )
    return SafetyVerdict(witness is None, witness, stats)
