import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ngacsafe.model import (
    Action,
    Command,
    EdgeKind,
    EntityKind,
    MalformedArgument,
    NgacModel,
    PrimitiveOp,
    PreconditionError,
    StateDigraph,
    Vertex,
    access_holds,
    access_relation,
    apply_primitive_op,
    assoc,
    edge_domain_problem,
    errors,
    execute_command,
    prohib,
    res_assign,
    user_assign,
    validate_model,
)
from ngacsafe.oracles import brute_force_access

from helpers import ALL_DESTROYS

U, UA, R, RA = EntityKind.USER, EntityKind.USER_ATTR, EntityKind.RESOURCE, EntityKind.RESOURCE_ATTR


def v(name, kind):
    return Vertex(name, kind)


BASE_VERTICES = [v("u", U), v("ua", UA), v("rsa", RA), v("rs", R)]
PATH_EDGES = [user_assign("u", "ua"), assoc("ua", "rsa", "r"), res_assign("rsa", "rs")]


def simple_model(edges=PATH_EDGES, commands=ALL_DESTROYS, rights=("r",)):
    init = StateDigraph.build(BASE_VERTICES, edges)
    return NgacModel(init, frozenset(rights), frozenset(BASE_VERTICES), tuple(commands))


class TestValidateModel:
    def test_well_formed_model_has_no_diagnostics(self):
        assert validate_model(simple_model()) == []

    def test_kind_overlap(self):
        init = StateDigraph.build([v("x", U), v("x", UA)])
        model = NgacModel(init, frozenset({"r"}), frozenset(init.vertices), ALL_DESTROYS)
        assert "kind overlap" in {d.code for d in validate_model(model)}

    def test_user_assign_into_a_user_is_an_edge_domain_error(self):
        model = simple_model(edges=[user_assign("ua", "u")])
        codes = {d.code for d in errors(validate_model(model))}
        assert codes == {"edge domain"}

    def test_unknown_right_and_missing_vertex(self):
        model = simple_model(edges=[assoc("ua", "rsa", "nope"), user_assign("u", "ghost")])
        codes = {d.code for d in validate_model(model)}
        assert {"unknown right", "missing vertex"} <= codes

    def test_initial_vertex_outside_universe(self):
        init = StateDigraph.build(BASE_VERTICES + [v("extra", UA)])
        model = NgacModel(init, frozenset({"r"}), frozenset(BASE_VERTICES), ALL_DESTROYS)
        assert "universe" in {d.code for d in validate_model(model)}

    def test_initial_cycle(self):
        verts = BASE_VERTICES + [v("ub", UA)]
        init = StateDigraph.build(verts, [user_assign("ua", "ub"), user_assign("ub", "ua")])
        model = NgacModel(init, frozenset({"r"}), frozenset(verts), ALL_DESTROYS)
        assert "cycle" in {d.code for d in validate_model(model)}

    def test_conditional_vertex_command_is_rejected(self):
        bad = Command("c", Action.CREATE, U, None, frozenset({user_assign("u", "ua")}))
        model = simple_model(commands=ALL_DESTROYS + (bad,))
        assert "command shape" in {d.code for d in validate_model(model)}

    def test_conditions_without_guard_are_rejected(self):
        bad = Command("c", Action.CREATE, EdgeKind.USER_ASSIGN, None, frozenset({assoc("ua", "rsa", "r")}))
        model = simple_model(commands=ALL_DESTROYS + (bad,))
        assert "command shape" in {d.code for d in validate_model(model)}

    def test_missing_destroy_is_only_a_warning(self):
        diags = validate_model(simple_model(commands=()))
        assert diags and not errors(diags)
        assert {d.code for d in diags} == {"missing destroy"}

    def test_duplicate_identical_creates_warn(self):
        e = user_assign("u", "ua")
        cmds = ALL_DESTROYS + (
            Command("c1", Action.CREATE, EdgeKind.USER_ASSIGN, e),
            Command("c2", Action.CREATE, EdgeKind.USER_ASSIGN, e),
        )
        diags = validate_model(simple_model(edges=PATH_EDGES[1:], commands=cmds))
        assert [d.code for d in diags] == ["duplicate create"]
        assert not errors(diags)


class TestPrimitiveOps:
    def state(self):
        return StateDigraph.build(BASE_VERTICES, PATH_EDGES)

    def test_create_user(self):
        s = StateDigraph.build([])
        out = apply_primitive_op(s, PrimitiveOp(Action.CREATE, v("u", U)), universe=frozenset(BASE_VERTICES))
        assert out.names(U) == ["u"]

    def test_create_user_already_present(self):
        with pytest.raises(PreconditionError, match="already present"):
            apply_primitive_op(self.state(), PrimitiveOp(Action.CREATE, v("u", U)))

    def test_create_outside_universe(self):
        with pytest.raises(PreconditionError, match="universe"):
            apply_primitive_op(StateDigraph(), PrimitiveOp(Action.CREATE, v("z", U)), universe=frozenset())

    def test_destroy_attr_removes_incident_edges(self):
        s = self.state()
        out = apply_primitive_op(s, PrimitiveOp(Action.DESTROY, v("ua", UA)))
        assert v("ua", UA) not in out.vertices
        assert out.edges == {res_assign("rsa", "rs")}

    @pytest.mark.parametrize("edge", [user_assign("rs", "ua"), res_assign("ua", "rs"), assoc("u", "rsa", "r")])
    def test_edge_outside_domain(self, edge):
        with pytest.raises(PreconditionError):
            apply_primitive_op(self.state(), PrimitiveOp(Action.CREATE, edge))

    def test_destroy_absent_edge(self):
        with pytest.raises(PreconditionError, match="not present"):
            apply_primitive_op(self.state(), PrimitiveOp(Action.DESTROY, prohib("ua", "rsa", "r")))

    def test_all_sixteen_operations_round_trip(self):
        full = StateDigraph.build(BASE_VERTICES, PATH_EDGES + [prohib("ua", "rsa", "r")])
        targets = list(BASE_VERTICES) + sorted(full.edges)
        assert len(targets) * 2 == 16
        for t in targets:
            if isinstance(t, Vertex):
                keep = [e for e in full.edges if t.name not in (e.src, e.dst)]
                base = StateDigraph(full.vertices - {t}, frozenset(keep))
            else:
                base = StateDigraph(full.vertices, full.edges - {t})
            made = apply_primitive_op(base, PrimitiveOp(Action.CREATE, t), rights=frozenset({"r"}))
            assert made.has(t)
            gone = apply_primitive_op(made, PrimitiveOp(Action.DESTROY, t))
            assert gone == base

    def test_destroy_then_create_loses_edges(self):
        s = self.state()
        gone = apply_primitive_op(s, PrimitiveOp(Action.DESTROY, v("ua", UA)))
        back = apply_primitive_op(gone, PrimitiveOp(Action.CREATE, v("ua", UA)))
        assert v("ua", UA) in back.vertices
        assert back.edges == {res_assign("rsa", "rs")}


class TestExecuteCommand:
    def test_guarded_create_adds_edge_when_condition_edge_absent(self):
        e = user_assign("u", "ua")
        cmd = Command("c", Action.CREATE, EdgeKind.USER_ASSIGN, e, frozenset({prohib("ua", "rsa", "r")}))
        s = StateDigraph.build(BASE_VERTICES)
        assert execute_command(s, cmd, e).edges == {e}

    def test_condition_edge_present_is_a_no_op(self):
        e = user_assign("u", "ua")
        blocker = assoc("ua", "rsa", "r")
        cmd = Command("c", Action.CREATE, EdgeKind.USER_ASSIGN, e, frozenset({blocker}))
        s = StateDigraph.build(BASE_VERTICES, [blocker])
        assert execute_command(s, cmd, e) is s

    def test_guard_mismatch_is_a_no_op(self):
        cmd = Command("c", Action.CREATE, EdgeKind.USER_ASSIGN, user_assign("u", "ua"))
        s = StateDigraph.build(BASE_VERTICES + [v("ub", UA)])
        assert execute_command(s, cmd, user_assign("u", "ub")) is s

    def test_unconditional_destroy_vertex(self):
        s = StateDigraph.build(BASE_VERTICES, PATH_EDGES)
        cmd = Command("d", Action.DESTROY, UA)
        out = execute_command(s, cmd, v("ua", UA))
        assert v("ua", UA) not in out.vertices and len(out.edges) == 1

    def test_malformed_argument(self):
        cmd = Command("d", Action.DESTROY, UA)
        with pytest.raises(MalformedArgument):
            execute_command(StateDigraph(), cmd, user_assign("u", "ua"))
        with pytest.raises(MalformedArgument):
            execute_command(StateDigraph(), cmd, v("u", U))


class TestAccess:
    def test_direct_path(self):
        assert access_holds(StateDigraph.build(BASE_VERTICES, PATH_EDGES), "u", "r", "rs")

    def test_other_label_does_not_count(self):
        edges = [PATH_EDGES[0], assoc("ua", "rsa", "w"), PATH_EDGES[2]]
        assert not access_holds(StateDigraph.build(BASE_VERTICES, edges), "u", "r", "rs")

    def test_no_associations(self):
        s = StateDigraph.build(BASE_VERTICES, [PATH_EDGES[0], PATH_EDGES[2]])
        assert not access_holds(s, "u", "r", "rs")

    def test_prohibition_is_not_a_path(self):
        edges = [PATH_EDGES[0], prohib("ua", "rsa", "r"), PATH_EDGES[2]]
        assert not access_holds(StateDigraph.build(BASE_VERTICES, edges), "u", "r", "rs")

    def test_absent_endpoints_are_false(self):
        assert not access_holds(StateDigraph(), "u", "r", "rs")

    def test_empty_state_relation(self):
        assert access_relation(StateDigraph(), "r") == frozenset()

    def test_single_path_relation(self):
        assert access_relation(StateDigraph.build(BASE_VERTICES, PATH_EDGES), "r") == {("u", "rs")}

    def test_two_users_sharing_an_attribute(self):
        verts = BASE_VERTICES + [v("u2", U)]
        s = StateDigraph.build(verts, PATH_EDGES + [user_assign("u2", "ua")])
        expected = brute_force_access(s, "r")
        assert expected == {("u", "rs"), ("u2", "rs")}
        assert access_relation(s, "r") == expected


# random states with at most 10 vertices: 2 users, 3 user attrs, 2 resource attrs, 2 resources
_verts = [v("u0", U), v("u1", U), v("a0", UA), v("a1", UA), v("a2", UA),
          v("o0", RA), v("o1", RA), v("r0", R), v("r1", R)]
_pool = (
    [user_assign(u, a) for u in ("u0", "u1") for a in ("a0", "a1", "a2")]
    + [user_assign(a, b) for a, b in itertools.combinations(("a0", "a1", "a2"), 2)]
    + [assoc(a, o, r) for a in ("a0", "a1", "a2") for o in ("o0", "o1") for r in ("r", "w")]
    + [prohib("a0", "o0", "r"), prohib("a2", "o1", "r")]
    + [res_assign("o0", "o1")]
    + [res_assign(o, rs) for o in ("o0", "o1") for rs in ("r0", "r1")]
)


@st.composite
def small_states(draw):
    verts = draw(st.sets(st.sampled_from(_verts)))
    names = {x.name for x in verts}
    usable = [e for e in _pool if e.src in names and e.dst in names]
    edges = draw(st.sets(st.sampled_from(usable))) if usable else set()
    return StateDigraph(frozenset(verts), frozenset(edges))


@settings(max_examples=300, deadline=None)
@given(small_states(), st.sampled_from(["r", "w"]))
def test_access_relation_matches_path_enumeration(state, right):
    assert access_relation(state, right) == brute_force_access(state, right)
    for u, rs in access_relation(state, right):
        assert access_holds(state, u, right, rs)


@settings(max_examples=200, deadline=None)
@given(small_states(), st.lists(st.tuples(st.sampled_from(list(Action)), st.sampled_from(_verts + _pool)), max_size=12))
def test_mutations_preserve_edge_domains(state, ops):
    for action, target in ops:
        try:
            state = apply_primitive_op(state, PrimitiveOp(action, target))
        except PreconditionError:
            continue
        for e in state.edges:
            assert edge_domain_problem(e, state.kinds) is None


@settings(max_examples=200, deadline=None)
@given(small_states(), st.sampled_from(_pool))
def test_failed_guard_returns_input_unchanged(state, edge):
    blocker = _pool[0] if edge != _pool[0] else _pool[1]
    cmd = Command("c", Action.CREATE, edge.kind, edge, frozenset({blocker}))
    blocked = StateDigraph(state.vertices | {_verts[0], _verts[2], _verts[3]}, state.edges | {blocker})
    assert execute_command(blocked, cmd, edge) == blocked
