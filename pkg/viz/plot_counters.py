#!/usr/bin/env python3
"""Work counters per fault round: layer evaluations and optimization hits.

A hardware-independent view of what late start and early stop saved.

Usage: plot_counters.py RESULTS_OR_PLOTDATA... -o out.png
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
    args = ap.parse_args(argv)
    try:
        entries, _ = entries_for(args.inputs, "counters")
    except PlotDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    rounds = np.arange(len(entries))
    evals = [e.get("layer_evals", 0) for e in entries]
    early = [e.get("early_stop_hits", 0) for e in entries]
    late = [e.get("late_start_hits", 0) for e in entries]

    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7.0, 5.0), sharex=True)
    ax1.bar(rounds, evals, color="tab:blue")
    ax1.set_ylabel("layer evaluations")
    ax1.set_title("work per fault round")
    ax2.plot(rounds, early, marker="s", label="early-stop hits")
    ax2.plot(rounds, late, marker="^", label="late-start hits")
    ax2.set_xlabel("fault round")
    ax2.set_ylabel("samples")
    ax2.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(args.output, dpi=110)
    plt.close(fig)

    print(summary_line(args.output, kind="counters", rounds=len(entries)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
