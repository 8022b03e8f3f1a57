#!/usr/bin/env python3
"""Accuracy versus neuron-parameter deviation, with a min/max band.

Input: one or more results files from parameter-scale sweeps (one rho
per file or mixed), or a flattened param_curve plotdata file.  The curve
is the mean accuracy across the faulted neurons; the shaded region spans
the per-neuron minimum and maximum.

Usage: plot_param_curve.py RESULTS_OR_PLOTDATA... -o out.png
"""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from plotdata import PlotDataError, entries_for, summary_line


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("inputs", nargs="+")
    ap.add_argument("-o", "--output", required=True)
    ap.add_argument("--param", default=None, help="label for the x axis")
    args = ap.parse_args(argv)
    try:
        entries, golden = entries_for(args.inputs, "param_curve")
    except PlotDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    rhos = [e["rho"] * 100 for e in entries]  # percent of nominal
    mean = [e["mean"] for e in entries]
    lo = [e["min"] for e in entries]
    hi = [e["max"] for e in entries]

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.fill_between(rhos, lo, hi, alpha=0.3, color="tab:blue",
                    label="min/max across neurons")
    ax.plot(rhos, mean, marker="o", color="tab:blue", label="mean accuracy")
    if golden is not None:
        ax.axhline(golden, linestyle="--", color="gray", linewidth=1,
                   label=f"golden {golden:.2f}")
    ax.axvline(100, linestyle=":", color="gray", linewidth=1)
    ax.set_xlabel(f"{args.param or 'parameter'} deviation (% of nominal)")
    ax.set_ylabel("classification accuracy")
    ax.set_ylim(-0.02, 1.05)
    ax.set_title("accuracy under neuron parameter deviation")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(args.output, dpi=110)
    plt.close(fig)

    print(summary_line(args.output, kind="param_curve", points=len(entries)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
