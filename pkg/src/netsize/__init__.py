"""Estimate the vertex count of a block-model graph from an induced subsample."""

from .errors import (
    ConsistencyError,
    DomainError,
    EstimatorUndefinedError,
    InitializationError,
    MomentWarning,
    NetsizeError,
    ValidationError,
)
from .graph_model import (
    SbmSpec,
    TypedGraph,
    cohesion_spec,
    crp_assignment,
    generate_sbm,
    mean_degree,
    read_edge_list,
    write_edge_list,
)
from .nsum import NsumResult, estimate_p, nsum_estimate, prob_empty_sample
from .observation import (
    ObservedData,
    SufficientStats,
    load_observed,
    sample_induced,
    save_observed,
    sufficient_stats,
)
from .posterior_analysis import PosteriorSummary, relative_error, summarize
from .pulse import (
    ChainConfig,
    ChainTrace,
    LatentState,
    PriorSpec,
    estimate_pulse,
    init_state,
    log_joint_posterior_sbm,
    log_posterior_er,
    run_chain_er,
    run_chain_sbm,
)

__version__ = "0.1.0"
