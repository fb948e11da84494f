"""
A small replicated experiment
=============================

Experiment plans replicate graphs and chains over a parameter grid and write
one CSV row per estimate.  This demo runs a reduced sample-size sweep,
writes the CSV plus a gnuplot script, and prints the median relative error
per sample size for both estimators.

The same plan can be run from the shell::

    netsize experiment plan.json --out vary_n.csv
    netsize plot-script vary_n.csv
"""

import tempfile
from pathlib import Path

from netsize.experiments import ExperimentPlan, median_rel_err, run_experiment, write_rows
from netsize.plotscript import emit_plot_script

plan = ExperimentPlan("vary_n", grid={"N": [500], "n": [60, 120, 240]},
                      replicates_per_point=4, chains_per_graph=1, base_seed=2,
                      chain={"iterations": 20_000, "burn_in": 5_000})
rows = run_experiment(plan)

out = Path(tempfile.mkdtemp()) / "vary_n.csv"
write_rows(rows, out)
script = emit_plot_script(out, "boxplot")
print(f"wrote {out} and {script}")

for est in ("nsum", "pulse"):
    med = median_rel_err(rows, est)
    print(est, {k: f"{100 * v:+.2f}%" for k, v in med.items()})
