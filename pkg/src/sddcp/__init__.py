"""Upper bounds and feasible factorizations for completely positive
programs, built on scaled diagonally dominant cones over embedded graphs.

The central object is an embedded graph: a list of unit-sum nonnegative
vectors (vertices of a simplex subset) together with edges between them.
Replacing the completely positive cone with the matrices expressible as
sums of two by two positive semidefinite nonnegative blocks along the
edges turns the program into a second order cone program. Refinement
schemes move, add, or rebuild vertices between solves to tighten the
bound, and every optimal solve yields an explicit rank-one decomposition
that certifies feasibility.
"""

__version__ = "0.1.0"

from .backend import (
    STATUS_FAILURE,
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    STATUS_UNBOUNDED,
    SolveOptions,
    SolveOutcome,
    capabilities,
    solve,
    weak_duality_check,
)
from .conic import (
    SENSE_MAX,
    SENSE_MIN,
    ConicProgram,
    CpProblem,
    build_diag_program,
    build_dnn_program,
    build_membership_program,
    build_sdd_program,
)
from .decomposition import (
    Decomposition,
    SegmentAtom,
    balanced_split,
    candidate_vertices,
    decompose,
    reconstruct,
)
from .embedding import (
    EmbeddedGraph,
    SegmentPoint,
    add_vertex,
    complete_edges,
    delta_partition,
    identity_complete,
    prune_duplicates,
    segment_point,
    star_to_base,
    subdivide_simplicial,
)
from .errors import (
    CapabilityError,
    FormatError,
    SddcpError,
    SizeLimitError,
    SolverFailure,
)
from .oracles import (
    MembershipResult,
    OracleResult,
    relative_gap,
    sdd_membership,
    sqp_oracle,
    stable_set_oracle,
)
from .problems import (
    Graph,
    RngSpec,
    builtin_graph,
    complement,
    encode_sqp,
    encode_stable_set,
    parse_dimacs,
    random_instance,
    random_sqp,
    read_instance,
    serialize_dimacs,
    write_instance,
)
from .schemes import (
    STRATEGIES,
    IterationRecord,
    SchemeConfig,
    SchemeTrace,
    run_scheme,
    stall_detector,
)
from .symmat import Block2, SymMatrix, embed, extract, trace_inner

__all__ = [
    "__version__",
    "Block2",
    "CapabilityError",
    "ConicProgram",
    "CpProblem",
    "Decomposition",
    "EmbeddedGraph",
    "FormatError",
    "Graph",
    "IterationRecord",
    "MembershipResult",
    "OracleResult",
    "RngSpec",
    "STATUS_FAILURE",
    "STATUS_INFEASIBLE",
    "STATUS_OPTIMAL",
    "STATUS_UNBOUNDED",
    "STRATEGIES",
    "SENSE_MAX",
    "SENSE_MIN",
    "SchemeConfig",
    "SchemeTrace",
    "SddcpError",
    "SegmentAtom",
    "SegmentPoint",
    "SizeLimitError",
    "SolveOptions",
    "SolveOutcome",
    "SolverFailure",
    "SymMatrix",
    "add_vertex",
    "balanced_split",
    "build_diag_program",
    "build_dnn_program",
    "build_membership_program",
    "build_sdd_program",
    "builtin_graph",
    "candidate_vertices",
    "capabilities",
    "complement",
    "complete_edges",
    "decompose",
    "delta_partition",
    "embed",
    "encode_sqp",
    "encode_stable_set",
    "extract",
    "identity_complete",
    "parse_dimacs",
    "prune_duplicates",
    "random_instance",
    "random_sqp",
    "read_instance",
    "reconstruct",
    "relative_gap",
    "run_scheme",
    "sdd_membership",
    "segment_point",
    "serialize_dimacs",
    "solve",
    "sqp_oracle",
    "stable_set_oracle",
    "stall_detector",
    "star_to_base",
    "subdivide_simplicial",
    "trace_inner",
    "weak_duality_check",
    "write_instance",
]
