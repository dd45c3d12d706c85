"""timkit: exact solvers, bounds, and a learn-to-defer RL agent for
topological interference management on message conflict graphs."""

from .bounds import DofBound, mais, select_initial_c
from .coloring import (
    Coloring,
    chromatic_number,
    fractional_local_coloring,
    local_coloring_exact,
    sli_greedy,
    tabucol,
)
from .datasets import gen_er, gen_wireless, partition_by_chromatic
from .env import EnvMode, EnvState, StepOutcome, reset, step
from .graphs import (
    ConflictGraph,
    SplitGraph,
    TopologyMatrix,
    UndirectedGraph,
    build_conflict_graph,
    complement,
    in_neighborhood,
    merge_split_assignment,
    node_split,
    underlying_undirected,
)
from .ia import (
    CodingScheme,
    LadderConfig,
    LadderResult,
    VerifyReport,
    best_scheme,
    scheme_from_coloring,
    simo_scalar_check,
    subspace_search,
    tdma_scheme,
    verify,
)
from .linalg import (
    IntMatrix,
    VectorSet,
    gen_binary_vectors,
    gen_generic_vectors,
    generic_rank_lifted,
    rank,
    span_contains,
)

__version__ = "0.1.0"

__all__ = [
    "ConflictGraph",
    "TopologyMatrix",
    "UndirectedGraph",
    "SplitGraph",
    "build_conflict_graph",
    "in_neighborhood",
    "complement",
    "node_split",
    "merge_split_assignment",
    "underlying_undirected",
    "IntMatrix",
    "VectorSet",
    "rank",
    "span_contains",
    "gen_binary_vectors",
    "gen_generic_vectors",
    "generic_rank_lifted",
    "DofBound",
    "mais",
    "select_initial_c",
    "Coloring",
    "sli_greedy",
    "tabucol",
    "chromatic_number",
    "local_coloring_exact",
    "fractional_local_coloring",
    "CodingScheme",
    "VerifyReport",
    "verify",
    "scheme_from_coloring",
    "tdma_scheme",
    "subspace_search",
    "simo_scalar_check",
    "best_scheme",
    "LadderConfig",
    "LadderResult",
    "EnvMode",
    "EnvState",
    "StepOutcome",
    "reset",
    "step",
    "gen_er",
    "gen_wireless",
    "partition_by_chromatic",
    "__version__",
]
