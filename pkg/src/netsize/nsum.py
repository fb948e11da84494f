"""Network scale-up estimator and its bias diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EstimatorUndefinedError, ValidationError
from .graph_model import SbmSpec
from .observation import SufficientStats

__all__ = ["NsumResult", "nsum_estimate", "estimate_p", "prob_empty_sample", "nsum_bias_bound"]


@dataclass(frozen=True)
class NsumResult:
    """Scale-up estimate ``n * sum_degrees / (2 * e_s)``.

    ``alternate`` is the unsimplified moment solution
    ``1 + (n - 1) * sum_degrees / (2 * e_s)``.  ``bias_lower_bound`` is the
    plug-in value of the asymptotic bias floor ``N/n - 1`` with the estimate
    standing in for N.
    """

    estimate: float
    n: int
    sum_degrees: int
    e_s: int
    bias_lower_bound: float
    alternate: float


def nsum_estimate(stats: SufficientStats) -> NsumResult:
    if stats.E_S <= 0:
        raise EstimatorUndefinedError("NSUM is undefined when the sample contains no edges")
    n, sd, es = stats.n, stats.sum_degrees, int(stats.E_S)
    est = n * sd / (2 * es)
    return NsumResult(
        estimate=est,
        n=n,
        sum_degrees=sd,
        e_s=es,
        bias_lower_bound=est / n - 1,
        alternate=1 + (n - 1) * sd / (2 * es),
    )


def estimate_p(stats: SufficientStats) -> float:
    """Edge density of the induced sample, ``E_S / C(n, 2)``."""
    if stats.n < 2:
        raise ValidationError("need at least two sampled vertices", "n")
    return stats.E_S / math.comb(stats.n, 2)


def prob_empty_sample(spec: SbmSpec, V) -> float:
    """Probability that a sample with block counts ``V`` contains no edge."""
    V = np.asarray(V, dtype=np.int64)
    if V.shape != (spec.K,) or np.any(V < 0):
        raise ValidationError("V must hold K nonnegative counts", "V")
    total = 0.0
    for i in range(spec.K):
        for j in range(i, spec.K):
            pairs = math.comb(int(V[i]), 2) if i == j else int(V[i]) * int(V[j])
            if pairs == 0:
                continue
            if spec.p[i, j] == 1.0:
                return 0.0
            total += pairs * math.log1p(-spec.p[i, j])
    return math.exp(total)


def nsum_bias_bound(N, n):
    """Asymptotic lower bound ``N/n - 1`` on the conditional bias of NSUM."""
    return N / n - 1
