"""Metropolis-Hastings samplers over the unseen block counts."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, EstimatorUndefinedError, InitializationError, MomentWarning
from ..nsum import nsum_estimate
from ..observation import SufficientStats
from ..posterior_analysis import PosteriorSummary, summarize
from . import _kernels
from .posterior import moment_existence, posterior_terms
from .types import ChainConfig, ChainTrace, LatentState, PriorSpec

__all__ = ["init_state", "run_chain_er", "run_chain_sbm", "estimate_pulse", "PulseResult"]

_CHUNK = 1 << 16


def _default_window(counts):
    return tuple(max(1, int(round(0.05 * c))) for c in counts)


def _uniform_chunks(cfg, ncols):
    rng = np.random.default_rng(cfg.seed)
    done = 0
    while done < cfg.iterations:
        m = min(_CHUNK, cfg.iterations - done)
        yield done, rng.random((m, ncols))
        done += m


def _moment_warning(stats, prior):
    lam, ok = moment_existence(stats, prior, 2)
    if ok:
        return []
    msg = f"posterior variance of N not guaranteed: lambda={lam:g} <= 3"
    warnings.warn(msg, MomentWarning, stacklevel=3)
    return [msg]


def _largest_remainder(total, weights):
    share = total * weights / weights.sum()
    base = np.floor(share).astype(np.int64)
    rest = total - int(base.sum())
    # ties go to the lower block index
    order = np.argsort(-(share - base), kind="stable")
    base[order[:rest]] += 1
    return base


def init_state(stats: SufficientStats, prior: PriorSpec, nsum_hint=None) -> LatentState:
    """Deterministic feasible starting point.

    Unseen counts start at ``V_i * max(nsum_hint - n, n) / n`` (rounded and
    capped at ``ntilde_max``).  Each vertex's pendant edges are split across
    blocks in proportion to ``ntilde_i * p_hat[i, t(v)]``, where ``p_hat`` is
    the posterior-mean edge density from the within-sample edges alone.  Any
    share exceeding its block's starting count spills into the other blocks
    in decreasing weight order, and a count is raised wherever the split
    needed more room.
    """
    prior = prior.for_K(stats.K)
    n, K, cap = stats.n, stats.K, prior.ntilde_max
    target = n if nsum_hint is None else max(nsum_hint - n, n)
    nt0 = np.clip(np.rint(stats.V * target / n).astype(np.int64), 0, cap)
    eta0, theta0 = posterior_terms(stats, prior)
    p_hat = eta0 / (eta0 + theta0)
    y = np.zeros((n, K), dtype=np.int64)
    for v, d in enumerate(stats.pendant_degree):
        d = int(d)
        if d == 0:
            continue
        w = nt0 * p_hat[:, stats.block[v]]
        if w.sum() <= 0:
            w = np.ones(K)
        alloc = np.minimum(_largest_remainder(d, w), nt0)
        rem = d - int(alloc.sum())
        order = np.argsort(-w, kind="stable")
        for limit in (nt0, np.full(K, cap)):
            for i in order:
                take = min(rem, int(limit[i]) - int(alloc[i]))
                if take > 0:
                    alloc[i] += take
                    rem -= take
        if rem > 0:
            raise InitializationError(
                f"sampled vertex at row {v} has pendant degree {d} > K * ntilde_max = {K * cap}")
        y[v] = alloc
    nt = np.maximum(nt0, y.max(axis=0) if n else 0)
    return LatentState(nt, y)


def run_chain_er(stats: SufficientStats, prior: PriorSpec, cfg: ChainConfig, init_ntilde: int) -> ChainTrace:
    """Random-walk Metropolis chain on the unseen count of a one-block model."""
    if stats.K != 1:
        raise DomainError("run_chain_er needs K=1")
    prior = prior.for_K(1)
    d = stats.pendant_degree
    lower = int(d.max()) if len(d) else 0
    init = int(init_ntilde)
    if not lower <= init <= prior.ntilde_max:
        raise InitializationError(
            f"initial count {init} outside support [{lower}, {prior.ntilde_max}]")
    dvals, dcounts = np.unique(d[d > 0], return_counts=True)
    dvals = dvals.astype(np.float64)
    dcounts = dcounts.astype(np.float64)
    args = (dvals, dcounts, float(d.sum()), float(stats.E[0, 0]), float(stats.n),
            float(prior.alpha[0, 0]), float(prior.beta[0, 0]))
    window = cfg.window[:1] if cfg.window else _default_window([init])
    cur_lp = _kernels.er_log_post(init, *args)
    if not np.isfinite(cur_lp):
        raise InitializationError("log posterior is not finite at the initial count")
    msgs = _moment_warning(stats, prior)

    R = cfg.n_records
    out_nt = np.empty(R, dtype=np.int64)
    out_lp = np.empty(R)
    rec = np.zeros(1, dtype=np.int64)
    counters = np.zeros(2, dtype=np.int64)
    cur = init
    for it0, u in _uniform_chunks(cfg, 2):
        cur, cur_lp = _kernels.er_run(
            cur, cur_lp, u, it0, *args, lower, prior.ntilde_max, window[0],
            cfg.exact_window_ratio, cfg.burn_in, cfg.thin, out_nt, out_lp, rec, counters)
    return ChainTrace(
        samples=out_nt.reshape(-1, 1),
        log_posterior_trace=out_lp,
        accept_rate_ntilde=counters[1] / max(counters[0], 1),
        accept_rate_y=0.0,
        ymax=np.full((R, 1), lower, dtype=np.int64),
        final_state=LatentState([cur], d.reshape(-1, 1)),
        window=tuple(window),
        config=cfg,
        proposals={"ntilde": int(counters[0]), "y": 0, "y_no_move": 0},
        warnings=msgs,
    )


def run_chain_sbm(stats: SufficientStats, prior: PriorSpec, cfg: ChainConfig, init: LatentState) -> ChainTrace:
    """Metropolis-within-Gibbs chain over unseen counts and pendant allocations.

    Each iteration updates, with probability ``cfg.update_mix``, the count of
    a uniformly chosen block through the window proposal, and otherwise the
    allocation of a uniformly chosen vertex with positive pendant degree
    through a one-edge move.  One-block inputs run :func:`run_chain_er`.
    """
    prior = prior.for_K(stats.K)
    if stats.K == 1:
        return run_chain_er(stats, prior, cfg, int(init.ntilde[0]))
    K = stats.K
    try:
        init.check(stats.pendant_degree, prior.ntilde_max)
    except DomainError as exc:
        raise InitializationError(f"infeasible initial state: {exc}") from None
    active = np.flatnonzero(stats.pendant_degree > 0)
    nt = init.ntilde.copy()
    y = np.ascontiguousarray(init.y[active])
    lab = stats.block[active].astype(np.int64)
    S = np.zeros((K, K), dtype=np.int64)
    np.add.at(S, lab, y)
    if cfg.window is None:
        window = _default_window(nt)
    elif len(cfg.window) == 1:
        window = cfg.window * K
    else:
        window = cfg.window
    if len(window) != K:
        raise InitializationError(f"window has {len(window)} entries for K={K}")
    window_arr = np.asarray(window, dtype=np.int64)
    eta0, theta0 = posterior_terms(stats, prior)
    V = stats.V.astype(np.float64)
    cur_lp = _kernels.sbm_log_post(nt, y, lab, S, V, eta0, theta0)
    if not np.isfinite(cur_lp):
        raise InitializationError("log posterior is not finite at the initial state")
    msgs = _moment_warning(stats, prior)

    R = cfg.n_records
    out_nt = np.empty((R, K), dtype=np.int64)
    out_ymax = np.empty((R, K), dtype=np.int64)
    out_lp = np.empty(R)
    rec = np.zeros(1, dtype=np.int64)
    counters = np.zeros(5, dtype=np.int64)
    for it0, u in _uniform_chunks(cfg, 4):
        cur_lp = _kernels.sbm_run(
            nt, y, lab, S, cur_lp, u, it0, V, eta0, theta0, prior.ntilde_max,
            window_arr, cfg.update_mix, cfg.exact_window_ratio, cfg.burn_in, cfg.thin,
            out_nt, out_lp, out_ymax, rec, counters)
    y_full = np.zeros_like(init.y)
    y_full[active] = y
    return ChainTrace(
        samples=out_nt,
        log_posterior_trace=out_lp,
        accept_rate_ntilde=counters[1] / max(counters[0], 1),
        accept_rate_y=counters[3] / max(counters[2], 1),
        ymax=out_ymax,
        final_state=LatentState(nt, y_full),
        window=tuple(window),
        config=cfg,
        proposals={"ntilde": int(counters[0]), "y": int(counters[2]), "y_no_move": int(counters[4])},
        warnings=msgs,
    )


@dataclass(eq=False)
class PulseResult:
    trace: ChainTrace
    summary: PosteriorSummary
    lam: float
    nsum_hint: float | None

    @property
    def estimate(self):
        return self.summary.mean_N


def estimate_pulse(stats: SufficientStats, prior: PriorSpec | None = None,
                   config: ChainConfig | None = None) -> PulseResult:
    """Run one chain from the default starting point and summarise it."""
    prior = (prior or PriorSpec.default(stats.K, stats.n)).for_K(stats.K)
    config = config or ChainConfig()
    try:
        hint = nsum_estimate(stats).estimate
    except EstimatorUndefinedError:
        hint = None
    state = init_state(stats, prior, hint)
    if stats.K == 1:
        trace = run_chain_er(stats, prior, config, int(state.ntilde[0]))
    else:
        trace = run_chain_sbm(stats, prior, config, state)
    lam, _ = moment_existence(stats, prior, 2)
    return PulseResult(trace, summarize(trace, stats.n, stats.V), lam, hint)
