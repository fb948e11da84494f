"""Point estimates and error metrics from recorded chain samples.

Quantiles use the lower nearest-rank rule: the q-quantile of m sorted values
is the value at 1-based rank ``max(1, ceil(q * m))``.  The MAP is the most
frequent recorded N, ties broken toward the smaller N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = ["PosteriorSummary", "BlockSummary", "summarize", "relative_error", "nearest_rank"]

DEFAULT_PROBS = (0.025, 0.25, 0.5, 0.75, 0.975)


def nearest_rank(values, q):
    """Lower nearest-rank quantile."""
    v = np.sort(np.asarray(values))
    if len(v) == 0:
        raise ValidationError("quantile of an empty sample")
    rank = max(1, math.ceil(q * len(v) - 1e-12))
    return float(v[rank - 1])


@dataclass(frozen=True)
class BlockSummary:
    mean: float
    sd: float
    quantiles: dict


@dataclass(frozen=True)
class PosteriorSummary:
    mean_N: float
    sd_N: float
    quantiles_N: dict
    per_block: tuple
    map_N: float
    n_samples: int


def _describe(x, probs):
    x = np.asarray(x, dtype=float)
    return float(x.mean()), float(x.std()), {q: nearest_rank(x, q) for q in probs}


def summarize(trace, n_sample_vertices, V, probs=DEFAULT_PROBS) -> PosteriorSummary:
    """Posterior summaries of N and of each block size ``ntilde_i + V_i``.

    ``trace`` is a :class:`~netsize.pulse.ChainTrace` or a plain
    ``(R, K)`` array of recorded unseen counts.
    """
    samples = np.asarray(getattr(trace, "samples", trace))
    if samples.ndim == 1:
        samples = samples.reshape(-1, 1)
    if len(samples) == 0:
        raise ValidationError("cannot summarise an empty trace")
    V = np.asarray(V)
    blocks = samples + V[None, :]
    N = samples.sum(axis=1) + n_sample_vertices
    mean, sd, qs = _describe(N, probs)
    values, counts = np.unique(N, return_counts=True)
    map_N = float(values[np.argmax(counts)])
    per_block = tuple(BlockSummary(*_describe(blocks[:, i], probs)) for i in range(blocks.shape[1]))
    return PosteriorSummary(mean, sd, qs, per_block, map_N, len(samples))


def relative_error(estimate, truth):
    """``(estimate - truth) / truth``."""
    if not truth > 0:
        raise ValidationError("truth must be positive")
    return (estimate - truth) / truth
