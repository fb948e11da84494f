"""Replicated simulation experiments written as CSV.

An :class:`ExperimentPlan` names one of the built-in protocols, a grid of
parameters and the replicate structure.  :func:`run_experiment` expands the
grid into points, draws ``replicates_per_point`` graphs per point, estimates
the size of each sampled graph with NSUM once and with the Bayesian sampler
``chains_per_graph`` times, and writes one row per estimate.

Seeding
-------
Every random stream is derived from the plan's ``base_seed`` with
:func:`mix`, a SplitMix64-style 64-bit mixing function applied to
``(base_seed, point_index, graph_index, stream)``.  Streams are

* 0 -- graph generation,
* 1 -- vertex sample,
* 2 -- random model parameters (heatmap and CRP protocols),
* 3 + c -- chain ``c``.

Because seeds depend only on these indices, appending grid points or
replicates never changes the rows already produced.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EstimatorUndefinedError, NetsizeError, ValidationError
from .graph_model import SbmSpec, cohesion_spec, crp_assignment, generate_sbm
from .nsum import nsum_estimate
from .observation import sample_induced, sufficient_stats
from .posterior_analysis import relative_error, summarize
from .pulse import ChainConfig, PriorSpec, init_state, moment_existence, run_chain_er, run_chain_sbm

__all__ = [
    "EXPERIMENTS",
    "CSV_COLUMNS",
    "ExperimentPlan",
    "mix",
    "expand_points",
    "estimate_runtime",
    "run_experiment",
    "write_rows",
]

_MASK = (1 << 64) - 1

CSV_COLUMNS = (
    "experiment", "point_index", "graph_index", "chain_index", "sweep", "x", "y",
    "estimator", "seed", "graph_seed", "sample_seed", "N_true", "n", "K",
    "N_hat", "rel_err", "sd", "q025", "q975",
    "N_true_blocks", "N_hat_blocks", "rel_err_blocks",
    "accept_nt", "accept_y", "lambda", "warnings", "status", "params",
)

# Default grids and replicate counts per protocol.  ``full`` holds the
# replicate structure used for the published figures.
EXPERIMENTS = {
    "vary_p": dict(
        grid={"N": [1000], "n": [280], "p": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]},
        sweep=("p", None), full=(100, 50)),
    "vary_N": dict(
        grid={"N": [400, 500, 600, 700, 800, 900, 1000], "n": [280], "p": [0.3]},
        sweep=("N", None), full=(100, 50)),
    "vary_n": dict(
        grid={"N": [1000], "n": [100, 200, 300, 400, 500], "p": [0.3]},
        sweep=("n", None), full=(100, 50)),
    "partition_heatmap": dict(
        grid={"N": [200], "ratio": [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8], "n": [40, 70, 100, 130, 160]},
        sweep=("ratio", "n"), full=(50, 10)),
    "epsilon_sweep": dict(
        grid={"N1": [350], "N2": [500], "p_tilde": [0.5], "n": [425],
              "epsilon": [-0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3]},
        sweep=("epsilon", None), full=(500, 50)),
    "crp_K_sweep": dict(
        grid={"N": [200], "n_seed": [100], "concentration": [1.0], "fraction": [0.33, 0.5, 0.66]},
        sweep=("fraction", "K"), full=(100, 10)),
    "single_run": dict(
        grid={"block_sizes": [[500]], "p": [[[0.3]]], "n": [150]},
        sweep=("n", None), full=(1, 1)),
}

DESK_SCALE = (20, 5)


def mix(*values):
    """Mix a tuple of nonnegative integers into one 64-bit seed.

    Each value is folded in with a SplitMix64 step, so the result depends on
    every value and on their order.
    """
    h = 0x9E3779B97F4A7C15
    for v in values:
        h = (h ^ (int(v) & _MASK)) & _MASK
        h = (h + 0x9E3779B97F4A7C15) & _MASK
        z = h
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        h = z ^ (z >> 31)
    return h


@dataclass
class ExperimentPlan:
    """One experiment: protocol name, parameter grid and replicate counts.

    ``grid`` overrides the protocol's default grid key by key.  ``chain``
    and ``prior`` hold :class:`~netsize.pulse.ChainConfig` fields and
    ``alpha``/``beta``/``ntilde_max`` overrides for every chain.
    """

    name: str
    grid: dict = field(default_factory=dict)
    replicates_per_point: int = DESK_SCALE[0]
    chains_per_graph: int = DESK_SCALE[1]
    base_seed: int = 0
    output_path: str = "experiment.csv"
    chain: dict = field(default_factory=dict)
    prior: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ValidationError(f"unknown experiment {self.name!r}; choose from {sorted(EXPERIMENTS)}", "name")
        defaults = EXPERIMENTS[self.name]["grid"]
        unknown = set(self.grid) - set(defaults)
        if unknown:
            raise ValidationError(f"unknown grid keys {sorted(unknown)} for {self.name}", "grid")
        merged = {}
        for key, default in defaults.items():
            values = self.grid.get(key, default)
            if not isinstance(values, list):
                values = [values]
            if len(values) == 0:
                raise ValidationError(f"grid entry {key!r} is empty", "grid")
            merged[key] = values
        self.grid = merged
        for name in ("replicates_per_point", "chains_per_graph"):
            if int(getattr(self, name)) < 1:
                raise ValidationError(f"{name} must be at least 1", name)
            setattr(self, name, int(getattr(self, name)))
        if not 0 <= int(self.base_seed) <= _MASK:
            raise ValidationError("base_seed must be a 64-bit unsigned integer", "base_seed")
        self.base_seed = int(self.base_seed)
        self.chain_config(0)

    @classmethod
    def from_dict(cls, d):
        known = {"name", "grid", "replicates_per_point", "chains_per_graph", "base_seed",
                 "output_path", "chain", "prior"}
        extra = set(d) - known
        if extra:
            raise ValidationError(f"unknown plan fields {sorted(extra)}", sorted(extra)[0])
        if "name" not in d:
            raise ValidationError("plan is missing 'name'", "name")
        return cls(**d)

    @classmethod
    def load(cls, path):
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON ({exc})") from None
        return cls.from_dict(doc)

    def to_dict(self):
        return dict(name=self.name, grid=self.grid, replicates_per_point=self.replicates_per_point,
                    chains_per_graph=self.chains_per_graph, base_seed=self.base_seed,
                    output_path=self.output_path, chain=self.chain, prior=self.prior)

    def full_scale(self):
        """Same plan with the replicate counts used for the published figures."""
        graphs, chains = EXPERIMENTS[self.name]["full"]
        d = self.to_dict()
        d.update(replicates_per_point=graphs, chains_per_graph=chains)
        return ExperimentPlan(**d)

    def chain_config(self, seed):
        opts = dict(self.chain)
        if "window" in opts and opts["window"] is not None:
            opts["window"] = tuple(np.atleast_1d(opts["window"]).tolist())
        try:
            return ChainConfig(seed=seed, **opts)
        except TypeError as exc:
            raise ValidationError(f"bad chain settings: {exc}", "chain") from None

    def prior_spec(self, K, n):
        opts = dict(self.prior)
        try:
            return PriorSpec.default(K, n, **opts)
        except TypeError as exc:
            raise ValidationError(f"bad prior settings: {exc}", "prior") from None


def expand_points(plan: ExperimentPlan):
    """Grid points in deterministic order (cartesian product, keys in the
    protocol's declared order, last key varying fastest)."""
    keys = list(plan.grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(plan.grid[k] for k in keys))]


def _two_block_random_p(rng, low):
    p11, p22 = rng.uniform(low, 1.0, size=2)
    p12 = rng.uniform(0.0, min(p11, p22))
    return [[p11, p12], [p12, p22]]


def _crp_random_p(rng, K):
    diag = rng.uniform(0.7, 1.0, size=K)
    p = np.diag(diag)
    for i in range(K):
        for j in range(i + 1, K):
            p[i, j] = p[j, i] = rng.uniform(0.0, min(diag[i], diag[j]))
    return p


def _build_model(name, point, param_seed):
    """Return ``(spec, n, extra)`` for one graph replicate of a grid point."""
    if name in ("vary_p", "vary_N", "vary_n"):
        return SbmSpec.erdos_renyi(int(point["N"]), float(point["p"])), int(point["n"]), {}
    if name == "partition_heatmap":
        N = int(point["N"])
        N1 = int(round(float(point["ratio"]) * N))
        rng = np.random.default_rng(param_seed)
        return SbmSpec((N1, N - N1), _two_block_random_p(rng, 0.5)), int(point["n"]), {}
    if name == "epsilon_sweep":
        spec = cohesion_spec(int(point["N1"]), int(point["N2"]), float(point["p_tilde"]), float(point["epsilon"]))
        return spec, int(point["n"]), {}
    if name == "crp_K_sweep":
        N, n_seed = int(point["N"]), int(point["n_seed"])
        K, sizes = crp_assignment(n_seed, N - n_seed, float(point["concentration"]), seed=param_seed)
        p = _crp_random_p(np.random.default_rng(mix(param_seed, 1)), K)
        n = int(round(float(point["fraction"]) * N))
        return SbmSpec(sizes, p), n, {"K": K}
    if name == "single_run":
        return SbmSpec(tuple(point["block_sizes"]), point["p"]), int(point["n"]), {}
    raise ValidationError(f"unknown experiment {name!r}", "name")


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _join(values):
    return ";".join(_fmt(v) for v in values)


def _params_json(point, spec, chain, prior):
    doc = {"point": point, "chain": chain, "prior": prior}
    if spec is not None:
        doc["block_sizes"] = list(spec.block_sizes)
        doc["p"] = spec.p.tolist()
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _graph_rows(plan: ExperimentPlan, point_index, point, graph_index):
    """All rows for one graph replicate: NSUM first, then one per chain."""
    base = plan.base_seed
    graph_seed = mix(base, point_index, graph_index, 0)
    sample_seed = mix(base, point_index, graph_index, 1)
    param_seed = mix(base, point_index, graph_index, 2)
    sx, sy = EXPERIMENTS[plan.name]["sweep"]
    common = dict(experiment=plan.name, point_index=point_index, graph_index=graph_index,
                  sweep=sx if sy is None else f"{sx}/{sy}", x=point[sx],
                  graph_seed=graph_seed, sample_seed=sample_seed)

    def row(**kw):
        r = dict(common)
        r.update(kw)
        return {c: _fmt(r.get(c)) for c in CSV_COLUMNS}

    try:
        spec, n, extra = _build_model(plan.name, point, param_seed)
    except NetsizeError as exc:
        return [row(estimator="none", status=f"error: {exc}",
                    params=_params_json(point, None, plan.chain, plan.prior))]
    if sy is not None:
        common["y"] = extra.get(sy, point.get(sy))
    common.update(N_true=spec.N, n=n, K=spec.K, N_true_blocks=_join(spec.block_sizes),
                  params=_params_json(point, spec, plan.chain, plan.prior))
    try:
        graph = generate_sbm(spec, graph_seed)
        stats = sufficient_stats(sample_induced(graph, n, sample_seed))
    except NetsizeError as exc:
        return [row(estimator="none", status=f"error: {exc}")]

    rows = []
    try:
        ns = nsum_estimate(stats)
        hint = ns.estimate
        rows.append(row(estimator="nsum", N_hat=ns.estimate, rel_err=relative_error(ns.estimate, spec.N),
                        status="ok"))
    except EstimatorUndefinedError as exc:
        hint = None
        rows.append(row(estimator="nsum", status=f"undefined: {exc}"))

    truth = np.asarray(spec.block_sizes, dtype=float)
    for c in range(plan.chains_per_graph):
        seed = mix(base, point_index, graph_index, 3 + c)
        try:
            prior = plan.prior_spec(stats.K, stats.n)
            cfg = plan.chain_config(seed)
            state = init_state(stats, prior, hint)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                if stats.K == 1:
                    trace = run_chain_er(stats, prior, cfg, int(state.ntilde[0]))
                else:
                    trace = run_chain_sbm(stats, prior, cfg, state)
            summ = summarize(trace, stats.n, stats.V)
            lam, _ = moment_existence(stats, prior, 2)
            blocks = np.array([b.mean for b in summ.per_block])
            rows.append(row(
                estimator="pulse", chain_index=c, seed=seed,
                N_hat=summ.mean_N, rel_err=relative_error(summ.mean_N, spec.N), sd=summ.sd_N,
                q025=summ.quantiles_N[0.025], q975=summ.quantiles_N[0.975],
                N_hat_blocks=_join(blocks), rel_err_blocks=_join((blocks - truth) / truth),
                accept_nt=trace.accept_rate_ntilde, accept_y=trace.accept_rate_y, **{"lambda": lam},
                warnings=" | ".join(trace.warnings), status="ok"))
        except NetsizeError as exc:
            rows.append(row(estimator="pulse", chain_index=c, seed=seed, status=f"error: {exc}"))
    return rows


# rough per-unit costs on a single core, used only for the printed estimate
_COST_PAIR = 6e-8
_COST_ITER_ER = 1.6e-6
_COST_ITER_SBM = 1.3e-5


def estimate_runtime(plan: ExperimentPlan):
    """Rough single-core wall time in seconds: ``(graph_seconds, chain_seconds)``."""
    iters = plan.chain_config(0).iterations
    g_cost = c_cost = 0.0
    for point in expand_points(plan):
        if plan.name in ("vary_p", "vary_N", "vary_n", "partition_heatmap", "crp_K_sweep"):
            N = int(point["N"])
        elif plan.name == "epsilon_sweep":
            N = int(point["N1"]) + int(point["N2"])
        else:
            N = int(sum(point["block_sizes"]))
        one_block = plan.name in ("vary_p", "vary_N", "vary_n") or (
            plan.name == "single_run" and len(point["block_sizes"]) == 1)
        g_cost += plan.replicates_per_point * N * (N - 1) / 2 * _COST_PAIR
        per_iter = _COST_ITER_ER if one_block else _COST_ITER_SBM
        c_cost += plan.replicates_per_point * plan.chains_per_graph * iters * per_iter
    return g_cost, c_cost


def _work(args):
    plan_dict, point_index, point, graph_index = args
    return _graph_rows(ExperimentPlan(**plan_dict), point_index, point, graph_index)


def run_experiment(plan: ExperimentPlan, jobs=1, log=sys.stderr):
    """Run every (point, graph, chain) of the plan and return the rows.

    Rows come back in (point, graph, chain) order whatever ``jobs`` is.
    A projected runtime is written to ``log`` before any work starts.
    """
    points = expand_points(plan)
    g_cost, c_cost = estimate_runtime(plan)
    if log is not None:
        n_graphs = len(points) * plan.replicates_per_point
        print(f"{plan.name}: {len(points)} points x {plan.replicates_per_point} graphs x "
              f"{plan.chains_per_graph} chains ({n_graphs} graphs); projected ~{g_cost:.0f}s graph "
              f"generation + ~{c_cost:.0f}s sampling on one core", file=log)
    tasks = [(plan.to_dict(), pi, pt, g) for pi, pt in enumerate(points)
             for g in range(plan.replicates_per_point)]
    if jobs is None or jobs <= 1:
        results = [_work(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_work, tasks))
    return [r for rows in results for r in rows]


def write_rows(rows, path, timestamp=True):
    """Write rows as CSV with a leading ``# generated ...`` comment line."""
    buf = io.StringIO()
    if timestamp:
        buf.write(f"# generated {time.strftime('%Y-%m-%dT%H:%M:%S%z')}\n")
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    if path is None or str(path) == "-":
        sys.stdout.write(buf.getvalue())
    else:
        Path(path).write_text(buf.getvalue())
    return path


def read_rows(path):
    """Read an experiment CSV, skipping ``#`` comment lines."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def median_rel_err(rows, estimator, key="rel_err", group="x"):
    """Median of a relative-error column per group value, skipping failed rows."""
    out = {}
    for r in rows:
        if r["estimator"] == estimator and r["status"] == "ok":
            out.setdefault(r[group], []).append(float(r[key]))
    return {k: float(np.median(v)) for k, v in out.items()}
