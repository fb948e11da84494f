"""Command-line entry point ``netsize``.

Exit status is 0 on success, 1 for invalid input (bad arguments, files or
configuration) and 2 when an estimate cannot be produced.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import warnings
from pathlib import Path

from .errors import ConsistencyError, DomainError, NetsizeError, ValidationError
from .experiments import ExperimentPlan, run_experiment, write_rows
from .graph_model import SbmSpec, generate_sbm, read_edge_list, write_edge_list
from .nsum import nsum_estimate
from .observation import load_observed, sample_induced, save_observed, sufficient_stats
from .plotscript import emit_plot_script
from .posterior_analysis import summarize
from .pulse import ChainConfig, PriorSpec, init_state, moment_existence, run_chain_er, run_chain_sbm

EXIT_OK, EXIT_INPUT, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from None


def _write_csv(path, header, rows):
    out = sys.stdout if path in (None, "-") else open(path, "w", newline="")
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()


def _f(x):
    return repr(float(x))


def cmd_generate(args):
    if not args.config:
        raise ValidationError("generate needs --config with block_sizes and p", "config")
    doc = _load_json(args.config)
    spec = SbmSpec.from_dict(doc)
    graph = generate_sbm(spec, args.seed)
    out = args.out or "graph.edges"
    edges, labels = write_edge_list(graph, out)
    print(f"wrote {graph.n_edges} edges on {graph.n_vertices} vertices to {edges} (labels: {labels})",
          file=sys.stderr)


def cmd_sample(args):
    graph = read_edge_list(args.graph)
    obs = sample_induced(graph, args.n, args.seed)
    save_observed(obs, args.out or "observed.json")


def cmd_estimate_nsum(args):
    stats = sufficient_stats(load_observed(args.observed))
    r = nsum_estimate(stats)
    _write_csv(args.out, ["n", "sum_degrees", "e_s", "N_hat", "alternate", "bias_lower_bound"],
               [[r.n, r.sum_degrees, r.e_s, _f(r.estimate), _f(r.alternate), _f(r.bias_lower_bound)]])


def _pulse_settings(args, stats):
    doc = _load_json(args.config) if args.config else {}
    unknown = set(doc) - {"prior", "chain"}
    if unknown:
        raise ValidationError(f"unknown config sections {sorted(unknown)}", sorted(unknown)[0])
    try:
        prior = PriorSpec.default(stats.K, stats.n, **doc.get("prior", {}))
        chain = dict(doc.get("chain", {}))
        if args.seed is not None:
            chain["seed"] = args.seed
        cfg = ChainConfig(**chain)
    except TypeError as exc:
        raise ValidationError(f"bad config: {exc}") from None
    return prior, cfg


def cmd_estimate_pulse(args):
    stats = sufficient_stats(load_observed(args.observed))
    prior, cfg = _pulse_settings(args, stats)
    try:
        hint = nsum_estimate(stats).estimate
    except NetsizeError:
        hint = None
    state = init_state(stats, prior, hint)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if stats.K == 1:
            trace = run_chain_er(stats, prior, cfg, int(state.ntilde[0]))
        else:
            trace = run_chain_sbm(stats, prior, cfg, state)
    for msg in trace.warnings:
        print(f"warning: {msg}", file=sys.stderr)
    s = summarize(trace, stats.n, stats.V)
    lam, _ = moment_existence(stats, prior, 2)
    q = s.quantiles_N
    header = ["N_hat", "sd", "q025", "q25", "q50", "q75", "q975", "map_N", "n_samples",
              "N_hat_blocks", "sd_blocks", "q025_blocks", "q975_blocks",
              "accept_nt", "accept_y", "lambda", "seed", "warnings"]

    def join(values):
        return ";".join(_f(v) for v in values)

    row = [_f(s.mean_N), _f(s.sd_N), _f(q[0.025]), _f(q[0.25]), _f(q[0.5]), _f(q[0.75]), _f(q[0.975]),
           _f(s.map_N), s.n_samples,
           join(b.mean for b in s.per_block), join(b.sd for b in s.per_block),
           join(b.quantiles[0.025] for b in s.per_block), join(b.quantiles[0.975] for b in s.per_block),
           _f(trace.accept_rate_ntilde), _f(trace.accept_rate_y), _f(lam), cfg.seed,
           " | ".join(trace.warnings)]
    _write_csv(args.out, header, [row])
    if args.trace:
        K = stats.K
        burn, thin = cfg.burn_in, cfg.thin
        rows = [[burn + (r + 1) * thin, int(trace.samples[r].sum()) + stats.n,
                 *(int(v) for v in trace.samples[r]), _f(trace.log_posterior_trace[r])]
                for r in range(len(trace))]
        _write_csv(args.trace, ["iteration", "N", *(f"ntilde_{i + 1}" for i in range(K)), "log_posterior"], rows)


def cmd_experiment(args):
    plan = ExperimentPlan.load(args.plan)
    if args.full_scale:
        plan = plan.full_scale()
    if args.seed is not None:
        plan.base_seed = int(args.seed)
    rows = run_experiment(plan, jobs=args.jobs)
    write_rows(rows, args.out or plan.output_path)


def cmd_plot_script(args):
    path = emit_plot_script(args.csv, args.kind, args.out)
    print(f"wrote {path}", file=sys.stderr)


def build_parser():
    p = _Parser(prog="netsize", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="draw a block-model graph and write an edge list")
    g.add_argument("--config", help="JSON with block_sizes and p")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", help="edge list path (labels go to <out>.labels)")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("sample", help="draw a uniform induced-subgraph sample")
    s.add_argument("graph", help="edge list written by 'generate'")
    s.add_argument("--n", type=int, required=True, help="number of sampled vertices")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="observed-data JSON path")
    s.set_defaults(func=cmd_sample)

    e = sub.add_parser("estimate-nsum", help="scale-up estimate from observed data")
    e.add_argument("observed")
    e.add_argument("--out", help="CSV path (default stdout)")
    e.set_defaults(func=cmd_estimate_nsum)

    b = sub.add_parser("estimate-pulse", help="Bayesian estimate from observed data")
    b.add_argument("observed")
    b.add_argument("--config", help="JSON with optional 'prior' and 'chain' sections")
    b.add_argument("--seed", type=int, help="overrides chain.seed")
    b.add_argument("--out", help="summary CSV path (default stdout)")
    b.add_argument("--trace", help="also write the thinned trace to this CSV")
    b.set_defaults(func=cmd_estimate_pulse)

    x = sub.add_parser("experiment", help="run a replicated experiment plan")
    x.add_argument("plan", help="experiment plan JSON")
    x.add_argument("--seed", type=int, help="overrides base_seed")
    x.add_argument("--out", help="overrides output_path ('-' for stdout)")
    x.add_argument("--full-scale", action="store_true", help="use the published replicate counts")
    x.add_argument("--jobs", type=int, default=1, help="worker processes")
    x.set_defaults(func=cmd_experiment)

    ps = sub.add_parser("plot-script", help="write a gnuplot script for an experiment CSV")
    ps.add_argument("csv")
    ps.add_argument("--kind", choices=("boxplot", "heatmap"), default="boxplot")
    ps.add_argument("--out", help="script path (default: CSV path with .gp suffix)")
    ps.set_defaults(func=cmd_plot_script)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValidationError, ConsistencyError, DomainError, OSError) as exc:
        print(f"netsize: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NetsizeError as exc:
        print(f"netsize: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
