"""
Estimating the size of one hidden graph
=======================================

We draw an Erdos-Renyi graph on 1000 vertices, observe an induced subgraph
on 150 of them together with each sampled vertex's total degree, and compare
the scale-up estimate with the Bayesian block-model estimate.

Run with ``python3 demos/01_single_graph.py``.
"""

import numpy as np

from netsize import (ChainConfig, SbmSpec, estimate_pulse, generate_sbm, nsum_estimate,
                     sample_induced, sufficient_stats)

# %%
# The hidden graph and the sample
# -------------------------------
spec = SbmSpec.erdos_renyi(1000, 0.3)
graph = generate_sbm(spec, seed=1)
obs = sample_induced(graph, n=150, seed=2)
stats = sufficient_stats(obs)
print(f"graph: {graph.n_vertices} vertices, {graph.n_edges} edges")
print(f"sample: n={stats.n}, induced edges E_S={stats.E_S}, "
      f"mean pendant degree {stats.pendant_degree.mean():.1f}")

# %%
# Scale-up estimate
# -----------------
# Each sampled vertex sees a fraction n/N of its neighbours inside the sample,
# so N is estimated as n * sum(degrees) / (2 E_S).
nsum = nsum_estimate(stats)
print(f"NSUM estimate: {nsum.estimate:.1f}")

# %%
# Bayesian estimate
# -----------------
# The sampler works on the number of unseen vertices and returns a trace of
# posterior draws; the summary reports the posterior mean and quantiles of N.
result = estimate_pulse(stats, config=ChainConfig(iterations=50_000, burn_in=10_000, seed=3))
s = result.summary
print(f"PULSE mean {s.mean_N:.1f}, sd {s.sd_N:.1f}, "
      f"95% interval [{s.quantiles_N[0.025]:.0f}, {s.quantiles_N[0.975]:.0f}]")
print(f"acceptance rate of count moves: {result.trace.accept_rate_ntilde:.2f}")

# %%
# A crude text histogram of the posterior draws of N.
totals = result.trace.totals(stats.n)
counts, edges = np.histogram(totals, bins=12)
for c, lo in zip(counts, edges):
    print(f"{lo:8.0f} {'#' * int(60 * c / counts.max())}")
