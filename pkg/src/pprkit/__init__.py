"""Personalized PageRank: Monte-Carlo fingerprint index plus vertex-centric decomposition queries."""

from pprkit.graph import Graph, GraphParseError, degree_bucket, load_edge_list, read_edge_list, write_edge_list
from pprkit.sparse import SparseVector, top_k
from pprkit.mc import WalkConfig, full_path_tail_bound, mcep_estimate, mcfp_estimate
from pprkit.index import (
    IndexChecksumError,
    IndexFormatError,
    IndexTruncatedError,
    IndexVersionError,
    PprIndex,
    build_index,
    load_index,
    save_index,
)
from pprkit.verd import (
    DecompState,
    QueryBatch,
    combine,
    decomp_recursive,
    query,
    verd_batch,
    verd_single,
)
from pprkit.evaluation import (
    ConvergenceError,
    EvalReport,
    Method,
    evaluate,
    power_iteration,
    rag,
    sample_queries,
)

__all__ = [
    "ConvergenceError",
    "DecompState",
    "EvalReport",
    "Graph",
    "GraphParseError",
    "IndexChecksumError",
    "IndexFormatError",
    "IndexTruncatedError",
    "IndexVersionError",
    "Method",
    "PprIndex",
    "QueryBatch",
    "SparseVector",
    "WalkConfig",
    "build_index",
    "combine",
    "decomp_recursive",
    "degree_bucket",
    "evaluate",
    "full_path_tail_bound",
    "load_edge_list",
    "load_index",
    "mcep_estimate",
    "mcfp_estimate",
    "power_iteration",
    "query",
    "rag",
    "read_edge_list",
    "sample_queries",
    "save_index",
    "top_k",
    "verd_batch",
    "verd_single",
    "write_edge_list",
]
