#!/usr/bin/env python3
"""Layer-wise accuracy bar chart.

For every layer and fault-model series, the bar is split into chunks by
quantized accuracy band; a chunk's height is the fraction of that
layer's elements whose fault lands in the band.

Usage: plot_bar.py RESULTS_OR_PLOTDATA... -o out.png
"""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from plotdata import ACCURACY_BANDS, PlotDataError, accuracy_band, entries_for, summary_line


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("inputs", nargs="+")
    ap.add_argument("-o", "--output", required=True)
    args = ap.parse_args(argv)
    try:
        entries, golden = entries_for(args.inputs, "bar")
    except PlotDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    layers = sorted({e["layer"] for e in entries})
    series = sorted({e["series"] for e in entries})
    cmap = plt.get_cmap("RdYlGn")
    width = 0.8 / len(series)

    fig, ax = plt.subplots(figsize=(1.8 + 1.4 * len(layers), 4.2))
    for s_i, s in enumerate(series):
        for l_i, layer in enumerate(layers):
            accs = [a for e in entries if e["series"] == s and e["layer"] == layer
                    for a in e["accuracies"]]
            if not accs:
                continue
            counts = np.zeros(ACCURACY_BANDS)
            for a in accs:
                counts[accuracy_band(a)] += 1
            fractions = counts / counts.sum()
            x = l_i - 0.4 + width * (s_i + 0.5)
            bottom = 0.0
            for band in range(ACCURACY_BANDS):
                if fractions[band] == 0:
                    continue
                ax.bar(x, fractions[band], width=width * 0.9, bottom=bottom,
                       color=cmap(band / (ACCURACY_BANDS - 1)),
                       edgecolor="black", linewidth=0.3)
                bottom += fractions[band]
    ax.set_xticks(range(len(layers)))
    ax.set_xticklabels([f"{l}\n({'/'.join(series)})" for l in layers])
    ax.set_ylabel("fraction of faulted elements")
    ax.set_ylim(0, 1.02)
    title = "accuracy per layer under single-element faults"
    if golden is not None:
        title += f" (golden {golden:.2f})"
    ax.set_title(title)
    sm = plt.cm.ScalarMappable(cmap=cmap, norm=plt.Normalize(0, 1))
    fig.colorbar(sm, ax=ax, label="classification accuracy band")
    fig.tight_layout()
    fig.savefig(args.output, dpi=110)
    plt.close(fig)

    print(summary_line(args.output, kind="bar", layers=len(layers),
                       series=len(series), entries=len(entries)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
