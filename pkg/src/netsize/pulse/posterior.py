"""Closed-form log posteriors, the composition oracle and the moment check."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from ..errors import DomainError, OracleSizeError
from ..observation import SufficientStats
from .types import LatentState, PriorSpec

__all__ = [
    "log_posterior_er",
    "log_joint_posterior_sbm",
    "posterior_terms",
    "marginal_likelihood_oracle",
    "OracleResult",
    "moment_existence",
]


def _log_comb(n, k):
    return gammaln(np.asarray(n) + 1.0) - gammaln(np.asarray(k) + 1.0) - gammaln(np.asarray(n) - k + 1.0)


def _log_beta(a, b):
    return gammaln(a) + gammaln(b) - gammaln(a + b)


def log_posterior_er(ntilde: int, stats: SufficientStats, prior: PriorSpec) -> float:
    """Unnormalised log posterior of the unseen count in the one-block model.

    Equals ``sum_v log C(ntilde, d~(v)) + log B(E + u + alpha,
    C(n, 2) - E + n * ntilde - u + beta)`` with ``u`` the total pendant
    degree; the flat prior contributes a constant that is dropped.
    """
    if stats.K != 1:
        raise DomainError(f"log_posterior_er needs K=1, got K={stats.K}")
    ntilde = int(ntilde)
    d = stats.pendant_degree
    lower = int(d.max()) if len(d) else 0
    if ntilde < lower:
        raise DomainError(f"ntilde={ntilde} is below the largest pendant degree {lower}")
    if ntilde > prior.ntilde_max:
        raise DomainError(f"ntilde={ntilde} exceeds ntilde_max={prior.ntilde_max}")
    n, E, u = stats.n, int(stats.E[0, 0]), int(d.sum())
    a, b = prior.alpha[0, 0], prior.beta[0, 0]
    pairs = n * (n - 1) // 2
    return float(np.sum(_log_comb(ntilde, d)) + _log_beta(E + u + a, pairs - E + n * ntilde - u + b))


def posterior_terms(stats: SufficientStats, prior: PriorSpec):
    """Data parts of the Beta arguments: ``eta0 = E + alpha`` and
    ``theta0`` = non-edge pair counts inside the sample plus ``beta``."""
    V = stats.V.astype(float)
    pairs = np.outer(V, V)
    pairs[np.diag_indices_from(pairs)] = V * (V - 1) / 2
    eta0 = stats.E + prior.alpha
    theta0 = pairs - stats.E + prior.beta
    return eta0, theta0


def log_joint_posterior_sbm(state: LatentState, stats: SufficientStats, prior: PriorSpec) -> float:
    """Unnormalised log joint posterior of ``(ntilde, y)`` given the data.

    The edge probabilities are integrated out against their Beta priors,
    leaving ``log zeta(ntilde) + sum_i log B(eta_ii, theta_ii + ntilde_i V_i)
    + sum_{i<j} log B(eta_ij, theta_ij + ntilde_i V_j + ntilde_j V_i)``.
    """
    prior = prior.for_K(stats.K)
    state.check(stats.pendant_degree, prior.ntilde_max)
    K = stats.K
    nt = state.ntilde.astype(float)
    y = state.y
    S = np.zeros((K, K))
    np.add.at(S, stats.block, y)
    eta0, theta0 = posterior_terms(stats, prior)
    zeta = float(np.sum(_log_comb(nt[None, :], y)))
    V = stats.V
    total = zeta
    for i in range(K):
        for j in range(i, K):
            s = S[i, i] if i == j else S[i, j] + S[j, i]
            extra = nt[i] * V[i] if i == j else nt[i] * V[j] + nt[j] * V[i]
            a, b = eta0[i, j] + s, theta0[i, j] - s + extra
            if a <= 0 or b <= 0:
                raise DomainError(f"non-positive Beta argument for block pair ({i + 1}, {j + 1})")
            total += float(_log_beta(a, b))
    return total


def moment_existence(stats: SufficientStats, prior: PriorSpec, moment: int = 2):
    """Sufficient condition for the ``moment``-th posterior moment of N.

    Returns ``(lam, exists)`` with ``lam = min_i sum_j (E_ij + alpha_ij)``
    and ``exists = lam > moment + 1``.
    """
    prior = prior.for_K(stats.K)
    lam = float(np.min(np.sum(stats.E + prior.alpha, axis=1)))
    return lam, lam > moment + 1


@dataclass(frozen=True)
class OracleResult:
    """Both evaluations of the pendant-marginalised log likelihood."""

    log_joint_sum: float
    log_direct: float
    n_allocations: int


def _compositions(total, caps):
    """All nonnegative vectors with the given sum and per-entry caps."""
    K = len(caps)
    if K == 1:
        if total <= caps[0]:
            yield (total,)
        return
    for first in range(min(total, caps[0]) + 1):
        for rest in _compositions(total - first, caps[1:]):
            yield (first,) + rest


def _xlogy(x, y):
    if x == 0:
        return 0.0
    if y <= 0.0:
        return -math.inf
    return x * math.log(y)


def _log_binom_term(nt, k, q):
    # log of C(nt, k) q^k (1 - q)^(nt - k)
    return (math.lgamma(nt + 1) - math.lgamma(k + 1) - math.lgamma(nt - k + 1)
            + _xlogy(k, q) + _xlogy(nt - k, 1.0 - q))


def marginal_likelihood_oracle(ntilde, stats: SufficientStats, p, max_allocations=10**6,
                               rtol=1e-10) -> OracleResult:
    """Check that summing the allocation-conditional likelihood over all
    allocations equals the per-vertex composition-sum likelihood.

    The first evaluation enumerates every joint allocation ``y`` of all
    sampled vertices and sums ``L_W * prod_v prod_i C(ntilde_i, y_i(v))
    p^y (1-p)^(ntilde_i - y)``.  The second multiplies per-vertex sums over
    compositions.  Both are returned in log space (``-inf`` when no
    allocation is feasible); a disagreement beyond ``rtol`` raises
    ``AssertionError``.
    """
    nt = [int(x) for x in ntilde]
    p = np.asarray(p, dtype=float)
    K = stats.K
    if len(nt) != K or p.shape != (K, K):
        raise DomainError("ntilde and p must match the number of blocks")

    log_lw = 0.0
    for i in range(K):
        for j in range(i, K):
            e = int(stats.E[i, j])
            pairs = math.comb(int(stats.V[i]), 2) if i == j else int(stats.V[i]) * int(stats.V[j])
            log_lw += _xlogy(e, p[i, j]) + _xlogy(pairs - e, 1.0 - p[i, j])

    per_vertex = []
    for v in range(stats.n):
        t = int(stats.block[v])
        comps = list(_compositions(int(stats.pendant_degree[v]), nt))
        terms = [sum(_log_binom_term(nt[i], c[i], p[i, t]) for i in range(K)) for c in comps]
        per_vertex.append(terms)

    count = math.prod(len(t) for t in per_vertex)
    if count > max_allocations:
        raise OracleSizeError(f"{count} joint allocations exceed the limit {max_allocations}")

    if count == 0:
        return OracleResult(-math.inf, -math.inf, 0)

    joint = []
    for combo in itertools.product(*per_vertex):
        joint.append(log_lw + math.fsum(combo))
    log_joint_sum = float(logsumexp(joint))
    log_direct = log_lw + math.fsum(float(logsumexp(t)) for t in per_vertex)

    if math.isfinite(log_direct) or math.isfinite(log_joint_sum):
        if not abs(math.expm1(log_joint_sum - log_direct)) <= rtol:
            raise AssertionError(
                f"composition identity violated: {log_joint_sum!r} vs {log_direct!r}")
    return OracleResult(log_joint_sum, log_direct, count)
