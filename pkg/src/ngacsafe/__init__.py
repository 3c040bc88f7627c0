"""Safety analysis for NGAC access-control models."""

from ngacsafe.dacc import (
    ConstraintGraph,
    Dag,
    DaccInstance,
    DaccVerdict,
    enumerate_mis,
    is_valid_subgraph,
    solve_dacc,
    st_path,
)
from ngacsafe.documents import DocumentError, parse_instance, parse_policy, serialize_policy
from ngacsafe.model import (
    Action,
    Command,
    Diagnostic,
    Edge,
    EdgeKind,
    EntityKind,
    NgacModel,
    PrimitiveOp,
    StateDigraph,
    Vertex,
    access_holds,
    access_relation,
    apply_primitive_op,
    execute_command,
    validate_model,
)
from ngacsafe.reductions import (
    SimpleGraph,
    gen_disjoint_triangles,
    gen_mutex_groups_model,
    reduce_3col_to_dacc,
    reduce_dacc_to_cosp,
)
from ngacsafe.safety import (
    SafetyVerdict,
    Witness,
    build_constraint_graph,
    build_supergraph,
    check_safety,
    reconstruct_command_sequence,
    restrict_to_right,
    verify_unsafety_certificate,
)

__version__ = "0.1.0"
