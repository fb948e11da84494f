"""Self-contained gnuplot scripts for experiment CSV files.

The data is embedded in the script as inline data blocks, so the script can
be rendered anywhere with ``gnuplot script.gp`` and needs nothing else.
"""

from __future__ import annotations

import csv
import warnings
from collections import defaultdict
from pathlib import Path

import numpy as np

from .errors import ValidationError

__all__ = ["emit_plot_script", "REQUIRED_COLUMNS"]

REQUIRED_COLUMNS = {
    "boxplot": ("experiment", "sweep", "x", "estimator", "rel_err", "status"),
    "heatmap": ("experiment", "sweep", "x", "y", "estimator", "rel_err", "status"),
}


def _read(path, kind):
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    if not lines:
        raise ValidationError(f"{path}: no header line", "columns")
    reader = csv.DictReader(lines)
    missing = [c for c in REQUIRED_COLUMNS[kind] if c not in (reader.fieldnames or [])]
    if missing:
        raise ValidationError(f"{path}: missing columns {missing}", "columns")
    return [r for r in reader if r["status"] == "ok" and r["rel_err"] != ""]


def _empty_frame(title):
    return "\n".join([
        "set terminal pngcairo size 800,500",
        'set output "plot.png"',
        f'set title "{title} (no data)"',
        "set xrange [0:1]",
        "set yrange [-1:1]",
        "plot NaN notitle",
        "",
    ])


def _boxplot(rows, title):
    groups = defaultdict(list)
    xs = sorted({float(r["x"]) for r in rows})
    for r in sorted(rows, key=lambda r: float(r["x"])):
        groups[r["estimator"]].append((float(r["x"]), 100.0 * float(r["rel_err"])))
    sweep = rows[0]["sweep"].split("/")[0]
    out = [
        "set terminal pngcairo size 900,500",
        'set output "plot.png"',
        f'set title "{title}"',
        f'set xlabel "{sweep}"',
        'set ylabel "relative error (%)"',
        "set style data boxplot",
        "set style boxplot sorted outliers pointtype 7",
        "set style fill solid 0.3 border -1",
        "set grid ytics",
        "set xtics (" + ", ".join(f'"{x:g}" {i}' for i, x in enumerate(xs)) + ")",
        f"set xrange [-0.6:{len(xs) - 0.4:g}]",
    ]
    names = sorted(groups)
    for name in names:
        out.append(f"${name} << EOD")
        # the factor column (1) places one box per sweep value at 0, 1, 2, ...
        out.extend(f'"{x:g}" {v!r}' for x, v in groups[name])
        out.append("EOD")
    width = 0.8 / len(names)
    plots = []
    for k, name in enumerate(names):
        shift = (k - (len(names) - 1) / 2) * width
        plots.append(f'${name} using ({shift:g}):2:({width * 0.9:g}):1 lc {k + 1} title "{name}"')
    out.append("plot " + ", \\\n     ".join(plots))
    out.append("")
    return "\n".join(out)


def _heatmap(rows, title):
    cells = defaultdict(list)
    for r in rows:
        cells[(r["estimator"], float(r["x"]), float(r["y"]))].append(float(r["rel_err"]))
    xs = sorted({k[1] for k in cells})
    ys = sorted({k[2] for k in cells})
    sx, _, sy = rows[0]["sweep"].partition("/")
    out = [
        "set terminal pngcairo size 1000,450",
        'set output "plot.png"',
        f'set multiplot layout 1,2 title "{title}: mean |relative error| (%)"',
        f'set xlabel "{sx}"',
        f'set ylabel "{sy or "y"}"',
        "set logscale cb",
        "set palette rgbformulae 22,13,10",
        "set view map",
    ]
    for name in sorted({k[0] for k in cells}):
        out.append(f"${name} << EOD")
        for x in xs:
            for y in ys:
                vals = cells.get((name, x, y))
                v = 100.0 * abs(float(np.mean(vals))) if vals else float("nan")
                out.append(f"{x!r} {y!r} {v!r}")
            out.append("")
        out.append("EOD")
        out.append(f'set title "{name}"')
        out.append(f"splot ${name} using 1:2:3 with pm3d notitle")
    out.append("unset multiplot")
    out.append("")
    return "\n".join(out)


def emit_plot_script(experiment_csv, kind="boxplot", out_path=None):
    """Write a gnuplot script rendering an experiment CSV.

    Parameters
    ----------
    experiment_csv : path
        CSV written by :func:`netsize.experiments.write_rows`.
    kind : {"boxplot", "heatmap"}
        Boxplots of relative error per sweep value, or a matrix of mean
        absolute relative error over the two sweep parameters.
    out_path : path, optional
        Defaults to the CSV path with a ``.gp`` suffix.

    Returns
    -------
    pathlib.Path
        The script written.

    Raises
    ------
    ValidationError
        If the CSV lacks a required column (all missing columns are listed).
    """
    if kind not in REQUIRED_COLUMNS:
        raise ValidationError(f"unknown plot kind {kind!r}", "kind")
    rows = _read(experiment_csv, kind)
    out_path = Path(out_path) if out_path else Path(experiment_csv).with_suffix(".gp")
    title = rows[0]["experiment"] if rows else Path(experiment_csv).stem
    if not rows:
        warnings.warn(f"{experiment_csv}: no usable rows, writing an empty frame", UserWarning, stacklevel=2)
        text = _empty_frame(title)
    elif kind == "boxplot":
        text = _boxplot(rows, title)
    else:
        text = _heatmap(rows, title)
    out_path.write_text(text)
    return out_path
