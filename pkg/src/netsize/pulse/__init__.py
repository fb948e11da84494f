"""Bayesian population-size samplers for block-model graphs."""

from .chains import PulseResult, estimate_pulse, init_state, run_chain_er, run_chain_sbm
from .posterior import (
    OracleResult,
    log_joint_posterior_sbm,
    log_posterior_er,
    marginal_likelihood_oracle,
    moment_existence,
)
from .proposals import avail, propose_block_count, propose_pendant_move
from .types import ChainConfig, ChainTrace, LatentState, PriorSpec

__all__ = [
    "ChainConfig",
    "ChainTrace",
    "LatentState",
    "OracleResult",
    "PriorSpec",
    "PulseResult",
    "avail",
    "estimate_pulse",
    "init_state",
    "log_joint_posterior_sbm",
    "log_posterior_er",
    "marginal_likelihood_oracle",
    "moment_existence",
    "propose_block_count",
    "propose_pendant_move",
    "run_chain_er",
    "run_chain_sbm",
]
