"""Prior, chain configuration, latent state and trace containers."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import DomainError, ValidationError


def _as_matrix(x, K, name):
    m = np.array(x, dtype=float)
    if m.ndim == 0:
        m = np.full((K, K), float(m))
    if m.shape != (K, K):
        raise ValidationError(f"{name} must be a scalar or {K}x{K} matrix", name)
    if not np.array_equal(m, m.T):
        raise ValidationError(f"{name} must be symmetric", name)
    if not np.all(np.isfinite(m)) or np.any(m <= 0):
        raise ValidationError(f"{name} entries must be positive", name)
    return m


@dataclass(eq=False)
class PriorSpec:
    """Beta(alpha_ij, beta_ij) priors on the edge probabilities and a flat
    prior on each unseen block count over ``0..ntilde_max``."""

    alpha: np.ndarray
    beta: np.ndarray
    ntilde_max: int

    def __post_init__(self):
        shapes = [np.shape(m) for m in (self.alpha, self.beta) if np.ndim(m) == 2]
        K = shapes[0][0] if shapes else 1
        self.alpha = _as_matrix(self.alpha, K, "alpha")
        self.beta = _as_matrix(self.beta, K, "beta")
        self.ntilde_max = int(self.ntilde_max)
        if self.ntilde_max < 1:
            raise ValidationError("ntilde_max must be at least 1", "ntilde_max")

    @property
    def K(self):
        return self.alpha.shape[0]

    @classmethod
    def default(cls, K, n, alpha=1.0, beta=1.0, ntilde_max=None):
        """Uniform Beta(1, 1) priors with ``ntilde_max = 100 * n``."""
        return cls(_as_matrix(alpha, K, "alpha"), _as_matrix(beta, K, "beta"),
                   100 * n if ntilde_max is None else ntilde_max)

    def for_K(self, K):
        """Broadcast a 1x1 prior to K blocks; other shapes must already match."""
        if self.K == K:
            return self
        if self.K == 1:
            return PriorSpec(_as_matrix(self.alpha[0, 0], K, "alpha"),
                             _as_matrix(self.beta[0, 0], K, "beta"), self.ntilde_max)
        raise ValidationError(f"prior is {self.K}x{self.K} but data has K={K}", "alpha")


@dataclass
class ChainConfig:
    """Settings of one MCMC run.

    ``window`` of ``None`` means ``max(1, round(0.05 * initial count))`` per
    block.  ``update_mix`` is the probability of a block-count update rather
    than a pendant-allocation update.

    The window proposal is not symmetric where the window is pinned to the
    lower support bound: a move from the bound up to ``bound + 2*window`` has
    no reverse.  With ``exact_window_ratio`` (the default) such moves are
    rejected, which makes the chain reversible with respect to the posterior.
    Setting it to ``False`` treats the proposal ratio as 1 everywhere; on
    small instances whose posterior sits near the bound this distorts the
    stationary law noticeably (total variation ~0.18 on a 3-vertex example).
    """

    iterations: int = 200_000
    burn_in: int = 50_000
    thin: int = 10
    window: tuple | None = None
    update_mix: float = 0.5
    seed: int = 0
    exact_window_ratio: bool = True

    def __post_init__(self):
        if self.iterations < 1 or not 0 <= self.burn_in < self.iterations:
            raise ValidationError("need 0 <= burn_in < iterations", "burn_in")
        if self.thin < 1:
            raise ValidationError("thin must be positive", "thin")
        if not 0.0 < self.update_mix < 1.0:
            raise ValidationError("update_mix must lie strictly between 0 and 1", "update_mix")
        if self.window is not None:
            self.window = tuple(int(w) for w in np.atleast_1d(self.window))
            if any(w < 1 for w in self.window):
                raise ValidationError("window entries must be >= 1", "window")

    @property
    def n_records(self):
        return (self.iterations - self.burn_in) // self.thin

    def replace(self, **kw):
        return replace(self, **kw)


@dataclass(eq=False)
class LatentState:
    """Unseen block counts ``ntilde`` and pendant allocations ``y``.

    ``y[v, i]`` is the number of pendant edges of sampled vertex ``v``
    (row order of the sufficient statistics) landing on unsampled vertices
    of block ``i``.
    """

    ntilde: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.ntilde = np.array(self.ntilde, dtype=np.int64)
        self.y = np.array(self.y, dtype=np.int64).reshape(-1, len(self.ntilde))

    def copy(self):
        return LatentState(self.ntilde.copy(), self.y.copy())

    def check(self, pendant_degree, ntilde_max=None):
        """Raise :class:`DomainError` unless the state lies in the support."""
        pendant_degree = np.asarray(pendant_degree)
        if self.y.shape != (len(pendant_degree), len(self.ntilde)):
            raise DomainError(f"y has shape {self.y.shape}, expected {(len(pendant_degree), len(self.ntilde))}")
        if np.any(self.ntilde < 0) or np.any(self.y < 0):
            raise DomainError("counts must be nonnegative")
        if ntilde_max is not None and np.any(self.ntilde > ntilde_max):
            raise DomainError(f"unseen block count exceeds ntilde_max={ntilde_max}")
        rows = self.y.sum(axis=1)
        bad = np.flatnonzero(rows != pendant_degree)
        if len(bad):
            raise DomainError(f"allocation of vertex row {bad[0]} sums to {rows[bad[0]]}, "
                              f"pendant degree is {pendant_degree[bad[0]]}")
        if len(self.y) and np.any(self.y > self.ntilde[None, :]):
            raise DomainError("some allocation exceeds the unseen count of its block")


@dataclass(eq=False)
class ChainTrace:
    """Post-burn-in, thinned output of one chain.

    ``samples[r]`` is the recorded unseen-count vector and ``ymax[r]`` the
    column maxima of the allocation at the same iteration.
    """

    samples: np.ndarray
    log_posterior_trace: np.ndarray
    accept_rate_ntilde: float
    accept_rate_y: float
    ymax: np.ndarray
    final_state: LatentState
    window: tuple
    config: ChainConfig
    proposals: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def __len__(self):
        return len(self.samples)

    def totals(self, n_sample_vertices):
        """Recorded population sizes ``sum(ntilde) + n``."""
        return self.samples.sum(axis=1) + n_sample_vertices
