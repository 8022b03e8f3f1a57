#!/usr/bin/env python3
"""Per-synapse accuracy heat map.

One cell per single-synapse fault round: pre-synaptic neurons on x,
post-synaptic neurons on y. --reshape R C re-grids the flattened cell
list for readability when a layer is very wide.

Usage: plot_heat.py RESULTS_OR_PLOTDATA... -o out.png [--reshape R C]
"""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from plotdata import PlotDataError, entries_for, summary_line


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("inputs", nargs="+")
    ap.add_argument("-o", "--output", required=True)
    ap.add_argument("--layer", default=None, help="restrict to one layer")
    ap.add_argument("--reshape", nargs=2, type=int, metavar=("R", "C"),
                    help="re-grid the flattened cells to R x C")
    args = ap.parse_args(argv)
    try:
        entries, golden = entries_for(args.inputs, "heat", layer=args.layer)
    except PlotDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if args.reshape:
        r, c = args.reshape
        if r * c < len(entries):
            print(f"error: reshape {r}x{c} holds {r * c} cells, "
                  f"need {len(entries)}", file=sys.stderr)
            return 1
        grid = np.full((r, c), np.nan)
        ordered = sorted(entries, key=lambda e: (e["row"], e["col"]))
        for i, e in enumerate(ordered):
            grid[i // c, i % c] = e["accuracy"]
    else:
        rows = 1 + max(e["row"] for e in entries)
        cols = 1 + max(e["col"] for e in entries)
        grid = np.full((rows, cols), np.nan)
        for e in entries:
            grid[e["row"], e["col"]] = e["accuracy"]

    fig, ax = plt.subplots(
        figsize=(2.0 + 0.25 * grid.shape[1], 1.6 + 0.25 * grid.shape[0]))
    im = ax.imshow(grid, cmap="RdYlGn", vmin=0.0, vmax=1.0, origin="lower",
                   interpolation="nearest")
    ax.set_xlabel("pre-synaptic neuron")
    ax.set_ylabel("post-synaptic neuron")
    title = "accuracy per faulted synapse"
    if golden is not None:
        title += f" (golden {golden:.2f})"
    ax.set_title(title)
    fig.colorbar(im, ax=ax, label="classification accuracy")
    fig.tight_layout()
    fig.savefig(args.output, dpi=110)
    plt.close(fig)

    print(summary_line(args.output, kind="heat", cells=len(entries),
                       grid=list(grid.shape)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
