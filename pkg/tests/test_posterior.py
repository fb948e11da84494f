import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from netsize import DomainError, LatentState, PriorSpec, SufficientStats
from netsize.errors import OracleSizeError
from netsize.pulse import log_joint_posterior_sbm, log_posterior_er, marginal_likelihood_oracle, moment_existence

from oracles import enumerate_states, normalise_log, quadrature_log_weights, random_tiny_stats


def er_stats(pendant, E):
    return SufficientStats.from_counts([0] * len(pendant), pendant, [[E]])


def test_er_beta_arithmetic():
    stats = er_stats([0, 0], 0)
    prior = PriorSpec.default(1, 2)
    # B(1, 1 + 1 + 2N~): one non-edge pair inside the sample, so B(1, 2) / B(1, 4) = 2
    diff = log_posterior_er(0, stats, prior) - log_posterior_er(1, stats, prior)
    assert diff == pytest.approx(math.log(2), rel=1e-14)


def test_er_matches_adaptive_quadrature():
    # three sampled vertices, pendant degrees from total degrees (2, 1, 1) and one inner edge
    stats = er_stats([1, 0, 1], 1)
    prior = PriorSpec.default(1, 3)
    d = stats.pendant_degree
    ours, ref = [], []
    for nt in range(1, 11):
        binoms = math.prod(math.comb(nt, int(k)) for k in d)

        def f(p):
            return p ** 1 * (1 - p) ** 2 * binoms * np.prod([p**k * (1 - p) ** (nt - k) for k in d])

        val, _ = integrate.quad(f, 0, 1, epsabs=0, epsrel=1e-13, limit=200)
        ref.append(math.log(val))
        ours.append(log_posterior_er(nt, stats, prior))
    # the flat prior only adds a constant
    assert np.allclose(np.exp(np.array(ours) - np.array(ref)), 1.0, rtol=1e-8, atol=0)


def test_er_support_edges():
    stats = er_stats([3, 1], 0)
    prior = PriorSpec.default(1, 2, ntilde_max=20)
    assert np.isfinite(log_posterior_er(3, stats, prior))
    with pytest.raises(DomainError):
        log_posterior_er(2, stats, prior)
    with pytest.raises(DomainError):
        log_posterior_er(21, stats, prior)


def test_er_against_mpmath():
    stats = er_stats([4, 2, 0, 7], 3)
    prior = PriorSpec(2.5, 1.5, 100)
    d = [int(x) for x in stats.pendant_degree]
    n, E, u = 4, 3, sum(d)
    mpmath.mp.dps = 50

    def exact(nt):
        val = mpmath.mpf(1)
        for k in d:
            val *= mpmath.binomial(nt, k)
        return val * mpmath.beta(E + u + 2.5, 6 - E + n * nt - u + 1.5)

    for a, b in [(7, 8), (7, 20), (12, 19), (19, 20)]:
        ratio = float(exact(a) / exact(b))
        got = math.exp(log_posterior_er(a, stats, prior) - log_posterior_er(b, stats, prior))
        assert got == pytest.approx(ratio, rel=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_one_block_joint_reduces_to_er(seed):
    rng = np.random.default_rng(seed)
    stats = random_tiny_stats(rng, K=1, max_w=5, max_pendant=4)
    prior = PriorSpec.default(1, stats.n, ntilde_max=15)
    lower = int(stats.pendant_degree.max())
    y = stats.pendant_degree.reshape(-1, 1)
    joint = np.array([log_joint_posterior_sbm(LatentState([nt], y), stats, prior) for nt in range(lower, 16)])
    er = np.array([log_posterior_er(nt, stats, prior) for nt in range(lower, 16)])
    assert np.allclose(np.diff(joint), np.diff(er), rtol=0, atol=1e-10)


def test_joint_matches_quadrature_small_example():
    stats = SufficientStats.from_counts([0, 1], [1, 1], [[0, 0], [0, 0]])
    prior = PriorSpec.default(2, 2, ntilde_max=6)
    states = list(enumerate_states(stats, 6))
    assert len(states) <= 200
    ours = normalise_log([log_joint_posterior_sbm(s, stats, prior) for s in states])
    ref = normalise_log(quadrature_log_weights(stats, prior, states))
    assert np.allclose(ours, ref, rtol=1e-6, atol=0)


@pytest.mark.parametrize("seed", range(10))
def test_joint_matches_quadrature_random(seed):
    rng = np.random.default_rng(100 + seed)
    stats = random_tiny_stats(rng, K=2, max_w=3, max_pendant=2)
    alpha = rng.uniform(0.5, 3.0, size=(2, 2))
    beta = rng.uniform(0.5, 3.0, size=(2, 2))
    prior = PriorSpec((alpha + alpha.T) / 2, (beta + beta.T) / 2, 4)
    states = list(enumerate_states(stats, 4))
    ours = normalise_log([log_joint_posterior_sbm(s, stats, prior) for s in states])
    ref = normalise_log(quadrature_log_weights(stats, prior, states))
    assert np.allclose(ours, ref, rtol=1e-6, atol=0)


def test_joint_against_mpmath():
    stats = SufficientStats.from_counts([0, 0, 1, 1], [3, 0, 2, 5], [[1, 2], [2, 1]])
    prior = PriorSpec.default(2, 4, ntilde_max=20)
    mpmath.mp.dps = 50
    V = [2, 2]

    def exact(nt, y):
        S = [[0, 0], [0, 0]]
        for v, t in enumerate([0, 0, 1, 1]):
            for i in range(2):
                S[t][i] += y[v][i]
        val = mpmath.mpf(1)
        for v in range(4):
            for i in range(2):
                val *= mpmath.binomial(nt[i], y[v][i])
        for i in range(2):
            eta = stats.E[i, i] + S[i][i] + 1
            theta = math.comb(V[i], 2) - stats.E[i, i] - S[i][i] + 1 + nt[i] * V[i]
            val *= mpmath.beta(eta, theta)
        s01 = S[0][1] + S[1][0]
        val *= mpmath.beta(stats.E[0, 1] + s01 + 1, V[0] * V[1] - stats.E[0, 1] - s01 + 1 + nt[0] * V[1] + nt[1] * V[0])
        return val

    a = ([5, 7], [[2, 1], [0, 0], [1, 1], [3, 2]])
    b = ([9, 3], [[1, 2], [0, 0], [0, 2], [3, 2]])
    ratio = float(exact(*a) / exact(*b))
    la = log_joint_posterior_sbm(LatentState(*a), stats, prior)
    lb = log_joint_posterior_sbm(LatentState(*b), stats, prior)
    assert math.exp(la - lb) == pytest.approx(ratio, rel=1e-10)


def test_joint_saturated_allocation():
    stats = SufficientStats.from_counts([0, 1], [2, 1], [[0, 1], [1, 0]])
    prior = PriorSpec.default(2, 2, ntilde_max=5)
    assert np.isfinite(log_joint_posterior_sbm(LatentState([2, 1], [[2, 0], [0, 1]]), stats, prior))
    with pytest.raises(DomainError):
        log_joint_posterior_sbm(LatentState([2, 1], [[1, 1], [0, 2]]), stats, prior)
    with pytest.raises(DomainError):
        log_joint_posterior_sbm(LatentState([2, 1], [[2, 0], [1, 1]]), stats, prior)


def test_composition_identity_hand_case():
    stats = SufficientStats.from_counts([0], [2], [[0, 0], [0, 0]])
    p = np.array([[0.3, 0.6], [0.6, 0.2]])
    r = marginal_likelihood_oracle([3, 3], stats, p)
    assert r.n_allocations == 3
    # three compositions of 2 into (Ñ1, Ñ2) = (3, 3) for a block-1 vertex
    direct = sum(
        math.comb(3, a) * 0.3**a * 0.7 ** (3 - a) * math.comb(3, 2 - a) * 0.6 ** (2 - a) * 0.4 ** (1 + a)
        for a in range(3)
    )
    assert math.exp(r.log_direct) == pytest.approx(direct, rel=1e-12)


def test_composition_identity_zero_degree_vertex():
    stats = SufficientStats.from_counts([1], [0], [[0, 0], [0, 0]])
    p = np.array([[0.3, 0.6], [0.6, 0.2]])
    r = marginal_likelihood_oracle([2, 4], stats, p)
    assert r.n_allocations == 1
    assert math.exp(r.log_direct) == pytest.approx(0.4**2 * 0.8**4, rel=1e-12)


def test_composition_identity_infeasible():
    stats = SufficientStats.from_counts([0], [5], [[0, 0], [0, 0]])
    r = marginal_likelihood_oracle([1, 2], stats, np.full((2, 2), 0.5))
    assert r.n_allocations == 0 and r.log_direct == -math.inf


def test_composition_identity_size_limit():
    stats = SufficientStats.from_counts([0] * 6, [6] * 6, [[0, 0], [0, 0]])
    with pytest.raises(OracleSizeError):
        marginal_likelihood_oracle([6, 6], stats, np.full((2, 2), 0.5), max_allocations=1000)


@pytest.mark.parametrize("seed", range(20))
def test_composition_identity_random(seed):
    rng = np.random.default_rng(seed)
    K = int(rng.integers(1, 4))
    stats = random_tiny_stats(rng, K=K, max_w=4, max_pendant=3)
    p = rng.uniform(0.01, 0.99, size=(K, K))
    p = (p + p.T) / 2
    nt = rng.integers(0, 5, size=K)
    r = marginal_likelihood_oracle(nt, stats, p)
    if r.n_allocations:
        assert math.exp(r.log_joint_sum - r.log_direct) == pytest.approx(1.0, rel=1e-10)


def test_moment_worked_example():
    stats = SufficientStats.from_counts([0, 0, 1], [0, 0, 0], [[2, 1], [1, 0]])
    lam, ok = moment_existence(stats, PriorSpec.default(2, 3), 2)
    assert lam == 3.0 and not ok


def test_moment_prior_dominated():
    stats = SufficientStats.from_counts([0, 1], [0, 0], [[0, 0], [0, 0]])
    lam, ok = moment_existence(stats, PriorSpec(10.0, 1.0, 10), 5)
    assert lam == 20 and ok


def test_moment_three_edges_per_type():
    stats = SufficientStats.from_counts([0, 0, 0, 1, 1, 1], [0] * 6, [[2, 1], [1, 2]])
    assert moment_existence(stats, PriorSpec.default(2, 6), 1)[1]
