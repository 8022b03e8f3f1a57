"""Loading and flattening of exported result files.

The scripts consume the engine's files only: either pre-flattened
"plotdata" documents (the `snnfault export-plots` output) or raw
"results" documents, which are flattened here with the same rules.
Everything is plain JSON; nothing from the simulator is imported.
"""

import json

import numpy as np

FORMAT_VERSION = 1
ACCURACY_BANDS = 10  # quantized shading levels for the bar charts


class PlotDataError(Exception):
    pass


def load_document(path):
    try:
        with open(path, "rb") as fh:
            doc = json.loads(fh.read().decode("utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise PlotDataError(f"{path}: cannot parse: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format_version") != FORMAT_VERSION:
        raise PlotDataError(f"{path}: not a supported document")
    if doc.get("kind") not in ("plotdata", "results"):
        raise PlotDataError(f"{path}: expected results or plotdata, "
                            f"got {doc.get('kind')!r}")
    return doc


def _first_fault(rnd):
    faults = rnd.get("faults") or [{}]
    sites = faults[0].get("sites") or [{}]
    return faults[0], sites[0]


def entries_for(paths, kind, layer=None):
    """Flattened entries of the requested plot kind from the given files.

    Raises PlotDataError when a plotdata file was flattened for a
    different kind, or when results contain nothing matching the kind.
    """
    if isinstance(paths, str):
        paths = [paths]
    docs = [load_document(p) for p in paths]
    golden = docs[0].get("golden_accuracy")
    entries = []
    for p, doc in zip(paths, docs):
        if doc["kind"] == "plotdata":
            if doc.get("plot_kind") != kind:
                raise PlotDataError(
                    f"{p}: plotdata is for {doc.get('plot_kind')!r}, not {kind!r}")
            entries.extend(doc["entries"])
        else:
            entries.extend(_flatten_results(doc, kind, layer))
    if not entries:
        raise PlotDataError(f"no entries of kind {kind!r} in {list(paths)}")
    if kind == "param_curve":
        entries = _pool_param_entries(entries)
    return entries, golden


def _flatten_results(doc, kind, layer=None):
    rounds = doc.get("rounds", [])
    if kind == "bar":
        per_series = {}
        for rnd in rounds:
            fault, site = _first_fault(rnd)
            key = (fault.get("model", {}).get("name", "?"),
                   str(site.get("layer", "?")))
            per_series.setdefault(key, []).append(rnd["accuracy"])
        return [{"series": s, "layer": l, "accuracies": accs}
                for (s, l), accs in per_series.items()]
    if kind == "heat":
        raw = []
        for rnd in rounds:
            _, site = _first_fault(rnd)
            if "synapse" not in site:
                continue
            if layer is not None and site.get("layer") != layer:
                continue
            raw.append((tuple(site["synapse"]), rnd["accuracy"], rnd["label"]))
        tails = sorted({idx[1:] for idx, _, _ in raw})
        col_of = {t: t[0] if len(t) == 1 else rank for rank, t in enumerate(tails)}
        return [{"row": idx[0], "col": int(col_of[idx[1:]]), "synapse": list(idx),
                 "accuracy": acc, "label": lbl} for idx, acc, lbl in raw]
    if kind == "param_curve":
        out = []
        for rnd in rounds:
            fault, _ = _first_fault(rnd)
            model = fault.get("model", {})
            if model.get("name") != "param_scale":
                continue
            out.append({"rho": float(model["rho"]), "param": model.get("param", "?"),
                        "accuracy": rnd["accuracy"]})
        return out
    if kind == "counters":
        out = []
        for i, rnd in enumerate(rounds):
            entry = {"round": i}
            entry.update(rnd.get("counters", {}))
            out.append(entry)
        return out
    raise PlotDataError(f"unknown plot kind {kind!r}")


def _pool_param_entries(entries):
    """Merge raw per-round parametric entries into per-rho stats."""
    ready = [e for e in entries if "mean" in e]
    raw = [e for e in entries if "mean" not in e]
    by_rho = {}
    for e in raw:
        by_rho.setdefault(float(e["rho"]), []).append(float(e["accuracy"]))
    pooled = [{"rho": rho, "mean": float(np.mean(accs)),
               "min": float(min(accs)), "max": float(max(accs))}
              for rho, accs in by_rho.items()]
    return sorted(ready + pooled, key=lambda e: e["rho"])


def accuracy_band(accuracy):
    """Quantize an accuracy into one of the shading bands."""
    return min(int(float(accuracy) * ACCURACY_BANDS), ACCURACY_BANDS - 1)


def summary_line(path, **fields):
    """One machine-readable line the tests parse."""
    import os

    fields["image"] = str(path)
    fields["bytes"] = os.path.getsize(path)
    return json.dumps(fields)
