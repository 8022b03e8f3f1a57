"""File formats: network models, event streams, datasets, campaign
configuration, results, and flattened plot data.

All structured files are JSON with a ``format_version`` and ``kind`` field.
Weights live in a little-endian float32 sidecar blob next to the network
header, addressed by per-layer byte offsets.  Event streams are either
text lines ``t_us x y p`` or the 5-byte binary record

    byte 0    x (8 bits)
    byte 1    y (8 bits)
    byte 2    bit 7: polarity, bits 6..0: timestamp bits 22..16
    bytes 3-4 timestamp bits 15..0 (big-endian, microseconds)

Parsers never raise anything but FormatError on malformed input, and all
round-trips are numerically exact.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from snnfault.srm import Clock, Network, NeuronParams, SpikeRecord
from snnfault.srm import conv2d as mk_conv2d
from snnfault.srm import dense as mk_dense
from snnfault.srm import sumpool as mk_sumpool
from snnfault.faults import Fault, FaultSite, model_from_config
from snnfault.faults import permanent, transient, assign_random_sites
from snnfault.campaign import (
    Campaign,
    CampaignOptions,
    CampaignResults,
    RoundResult,
    Sample,
)

__all__ = [
    "FormatError",
    "FORMAT_VERSION",
    "save_network",
    "load_network",
    "load_events",
    "save_events",
    "encode_events",
    "load_dataset",
    "save_dataset",
    "parse_campaign",
    "save_campaign_config",
    "export_results",
    "load_results",
    "export_plot_data",
    "load_plot_data",
    "rle_encode",
    "rle_decode",
]

FORMAT_VERSION = 1


class FormatError(Exception):
    """Structured parse/validation failure, anchored to a file location."""

    def __init__(self, path, message):
        self.path = str(path)
        super().__init__(f"{path}: {message}")


def _load_json(path, kind):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
        doc = json.loads(raw.decode("utf-8"))
    except OSError as exc:
        raise FormatError(path, f"cannot read: {exc}") from exc
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(path, f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError(path, "top level must be a JSON object")
    if doc.get("kind") != kind:
        raise FormatError(path, f"expected kind {kind!r}, got {doc.get('kind')!r}")
    if doc.get("format_version") != FORMAT_VERSION:
        raise FormatError(path, f"unsupported format_version {doc.get('format_version')!r}")
    return doc


def _write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Network model files


def save_network(net: Network, path) -> None:
    """Header JSON at path, weights in a .bin sidecar next to it."""
    blob_name = os.path.splitext(os.path.basename(path))[0] + ".bin"
    layers_doc = []
    blob = bytearray()
    for layer in net.layers:
        entry = {"name": layer.name, "kind": layer.kind}
        if layer.kind == "sumpool":
            entry["window"] = list(layer.pool)
        else:
            entry["params"] = {
                "tau_s": layer.params.tau_s,
                "tau_ref": layer.params.tau_ref,
                "theta": layer.params.theta,
                "u_rest": layer.params.u_rest,
            }
            if layer.quantizer_range is not None:
                entry["quantizer_range"] = list(layer.quantizer_range)
            entry["weight_offset"] = len(blob)
            entry["weight_count"] = int(layer.weights.size)
            blob.extend(np.ascontiguousarray(layer.weights, dtype="<f4").tobytes())
            if layer.kind == "dense":
                entry["num_neurons"] = int(layer.weights.shape[0])
            else:
                oc, _, kh, kw = layer.weights.shape
                entry.update(out_channels=int(oc), kernel=[int(kh), int(kw)],
                             stride=layer.stride, padding=layer.padding)
        layers_doc.append(entry)
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": "network",
        "clock": {"period_ms": net.clock.period_ms, "num_steps": net.clock.num_steps},
        "num_classes": net.num_classes,
        "input_shape": list(net.input_shape),
        "weights_file": blob_name,
        "layers": layers_doc,
    }
    _write_json(path, doc)
    with open(os.path.join(os.path.dirname(os.path.abspath(path)), blob_name), "wb") as fh:
        fh.write(bytes(blob))


def _parse_params(entry, where, path):
    p = entry.get("params")
    if not isinstance(p, dict):
        raise FormatError(path, f"{where}: missing params")
    try:
        return NeuronParams(tau_s=float(p["tau_s"]), tau_ref=float(p["tau_ref"]),
                            theta=float(p["theta"]),
                            u_rest=float(p.get("u_rest", 0.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(path, f"{where}: bad params: {exc}") from exc


def load_network(path) -> Network:
    doc = _load_json(path, "network")
    base = os.path.dirname(os.path.abspath(path))
    try:
        clock = Clock(float(doc["clock"]["period_ms"]), int(doc["clock"]["num_steps"]))
        num_classes = int(doc["num_classes"])
        shape = tuple(int(v) for v in doc["input_shape"])
        blob_path = os.path.join(base, str(doc["weights_file"]))
        entries = doc["layers"]
        if not isinstance(entries, list) or not entries:
            raise FormatError(path, "layers must be a non-empty list")
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(path, f"bad header: {exc}") from exc
    try:
        with open(blob_path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise FormatError(path, f"cannot read weights blob: {exc}") from exc

    layers = []
    for i, entry in enumerate(entries):
        where = f"layers[{i}]"
        try:
            name = str(entry["name"])
            kind = entry["kind"]
        except (KeyError, TypeError) as exc:
            raise FormatError(path, f"{where}: {exc}") from exc
        try:
            if kind == "sumpool":
                layer = mk_sumpool(name, shape, tuple(int(v) for v in entry["window"]))
            elif kind in ("dense", "conv2d"):
                params = _parse_params(entry, where, path)
                offset = int(entry["weight_offset"])
                count = int(entry["weight_count"])
                end = offset + 4 * count
                if offset < 0 or end > len(blob):
                    raise FormatError(
                        path, f"{where} ({name}): weights [{offset}:{end}] exceed "
                              f"blob of {len(blob)} bytes")
                w = np.frombuffer(blob[offset:end], dtype="<f4").copy()
                qr = entry.get("quantizer_range")
                qr = tuple(float(v) for v in qr) if qr is not None else None
                if kind == "dense":
                    n = int(entry["num_neurons"])
                    if count != n * int(np.prod(shape)):
                        raise FormatError(
                            path, f"{where} ({name}): weight_count {count} does not "
                                  f"match {n} x {int(np.prod(shape))}")
                    layer = mk_dense(name, shape, n, w.reshape(n, -1), params,
                                     quantizer_range=qr)
                else:
                    oc = int(entry["out_channels"])
                    kh, kw = (int(v) for v in entry["kernel"])
                    if count != oc * shape[0] * kh * kw:
                        raise FormatError(
                            path, f"{where} ({name}): weight_count {count} does not "
                                  f"match {oc}x{shape[0]}x{kh}x{kw}")
                    layer = mk_conv2d(name, shape, w.reshape(oc, shape[0], kh, kw),
                                      params, stride=int(entry.get("stride", 1)),
                                      padding=int(entry.get("padding", 0)),
                                      quantizer_range=qr)
            else:
                raise FormatError(path, f"{where}: unknown layer kind {kind!r}")
        except FormatError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(path, f"{where} ({name}): {exc}") from exc
        layers.append(layer)
        shape = layer.output_shape
    try:
        return Network(layers, clock, num_classes)
    except ValueError as exc:
        raise FormatError(path, f"inconsistent network: {exc}") from exc


# ---------------------------------------------------------------------------
# Event streams


def load_events(path, binary=False) -> np.ndarray:
    """Events as an (n, 4) int array of columns (t_us, x, y, p)."""
    return _load_events_bin5(path) if binary else _load_events_text(path)


def _load_events_text(path) -> np.ndarray:
    events = []
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
        text = raw.decode("utf-8")
    except OSError as exc:
        raise FormatError(path, f"cannot read: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise FormatError(path, f"not text: {exc}") from exc
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise FormatError(path, f"line {ln}: expected 't_us x y p', got {line!r}")
        try:
            t, x, y, p = (int(v) for v in parts)
        except ValueError as exc:
            raise FormatError(path, f"line {ln}: {exc}") from exc
        if t < 0:
            raise FormatError(path, f"line {ln}: negative timestamp")
        if p not in (0, 1):
            raise FormatError(path, f"line {ln}: polarity must be 0 or 1, got {p}")
        if events and t < events[-1][0]:
            raise FormatError(path, f"line {ln}: timestamps must be non-decreasing")
        events.append((t, x, y, p))
    return np.array(events, dtype=np.int64).reshape(-1, 4)


def _load_events_bin5(path) -> np.ndarray:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise FormatError(path, f"cannot read: {exc}") from exc
    if len(raw) % 5:
        raise FormatError(path, f"length {len(raw)} is not a multiple of 5 bytes")
    n = len(raw) // 5
    events = np.empty((n, 4), dtype=np.int64)
    prev_t = -1
    for i in range(n):
        b = raw[5 * i: 5 * i + 5]
        t = ((b[2] & 0x7F) << 16) | (b[3] << 8) | b[4]
        if t < prev_t:
            raise FormatError(path, f"event {i}: timestamps must be non-decreasing")
        prev_t = t
        events[i] = (t, b[0], b[1], (b[2] >> 7) & 1)
    return events


def save_events(events, path, binary=False) -> None:
    events = np.asarray(events, dtype=np.int64).reshape(-1, 4)
    if binary:
        out = bytearray()
        for t, x, y, p in events:
            if not (0 <= x < 256 and 0 <= y < 256 and 0 <= t < (1 << 23)):
                raise ValueError(f"event ({t},{x},{y},{p}) exceeds 5-byte encoding")
            out += bytes([int(x), int(y), (int(p) << 7) | ((int(t) >> 16) & 0x7F),
                          (int(t) >> 8) & 0xFF, int(t) & 0xFF])
        with open(path, "wb") as fh:
            fh.write(bytes(out))
    else:
        with open(path, "w", encoding="utf-8") as fh:
            for t, x, y, p in events:
                fh.write(f"{t} {x} {y} {p}\n")


def encode_events(events, clock: Clock, sensor_shape) -> SpikeRecord:
    """Bin events onto the clock grid as a (2 x H x W, d) binary record.

    An event at time t lands in bin ceil(t / T) clamped to [1, d]; repeats
    in the same cell collapse to a single 1.
    """
    h, w = (int(v) for v in sensor_shape)
    d = clock.num_steps
    t_us_per_step = clock.period_ms * 1000.0
    values = np.zeros((2, h, w, d))
    for i, (t, x, y, p) in enumerate(np.asarray(events, dtype=np.int64).reshape(-1, 4)):
        if not (0 <= x < w and 0 <= y < h):
            raise ValueError(f"event {i}: coords ({x},{y}) outside sensor {h}x{w}")
        if p not in (0, 1):
            raise ValueError(f"event {i}: polarity must be 0 or 1")
        j = min(max(math.ceil(t / t_us_per_step), 1), d)
        values[p, y, x, j - 1] = 1.0
    return SpikeRecord("input", values.reshape(2 * h * w, d), (2, h, w))


# ---------------------------------------------------------------------------
# Datasets


def save_dataset(path, sensor_shape, samples) -> None:
    """Manifest for event files: samples = [(events_file, label, fmt), ...]."""
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": "dataset",
        "sensor": [int(v) for v in sensor_shape],
        "samples": [{"events": f, "label": int(lbl), "format": fmt}
                    for f, lbl, fmt in samples],
    }
    _write_json(path, doc)


def load_dataset(path, clock: Clock) -> tuple[list[Sample], tuple[int, int]]:
    doc = _load_json(path, "dataset")
    base = os.path.dirname(os.path.abspath(path))
    try:
        h, w = (int(v) for v in doc["sensor"])
        entries = doc["samples"]
        if not isinstance(entries, list):
            raise FormatError(path, "samples must be a list")
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(path, f"bad manifest: {exc}") from exc
    samples = []
    for i, entry in enumerate(entries):
        try:
            fmt = entry.get("format", "text")
            if fmt not in ("text", "bin5"):
                raise FormatError(path, f"samples[{i}]: unknown format {fmt!r}")
            events = load_events(os.path.join(base, str(entry["events"])),
                                 binary=(fmt == "bin5"))
            record = encode_events(events, clock, (h, w))
            samples.append(Sample(record.values, int(entry["label"])))
        except FormatError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(path, f"samples[{i}]: {exc}") from exc
    return samples, (h, w)


# ---------------------------------------------------------------------------
# Campaign configuration


def _parse_duration(doc, where, path, as_json=False):
    if doc is None or doc == "permanent":
        return permanent()
    if isinstance(doc, dict) and "transient" in doc:
        try:
            t1, t2 = (int(v) for v in doc["transient"])
            return transient(t1, t2)
        except (TypeError, ValueError) as exc:
            raise FormatError(path, f"{where}: bad transient window: {exc}") from exc
    raise FormatError(path, f"{where}: bad duration {doc!r}")


def _parse_site(doc, where, path):
    if not isinstance(doc, dict):
        raise FormatError(path, f"{where}: site must be an object")
    try:
        layer = doc.get("layer")
        if "neuron" in doc:
            return FaultSite(layer, position=tuple(int(v) for v in doc["neuron"]))
        if "synapse" in doc:
            return FaultSite(layer, index=tuple(int(v) for v in doc["synapse"]))
        return FaultSite(layer)
    except (TypeError, ValueError) as exc:
        raise FormatError(path, f"{where}: {exc}") from exc


def _parse_fault(doc, where, path, net):
    if not isinstance(doc, dict):
        raise FormatError(path, f"{where}: fault must be an object")
    try:
        model = model_from_config(doc["model"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(path, f"{where}: {exc}") from exc
    duration = _parse_duration(doc.get("duration"), where, path)
    if "random" in doc:
        rnd = doc["random"]
        try:
            count = int(rnd["count"])
            scope = rnd.get("scope", "network")
            scope = None if scope == "network" else scope
            if "seed" in rnd:
                sites = assign_random_sites(net, model.target, scope, count,
                                            int(rnd["seed"]))
            else:
                sites = [FaultSite(scope) for _ in range(count)]
        except FormatError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(path, f"{where}: bad random block: {exc}") from exc
    else:
        sites_doc = doc.get("sites")
        if not isinstance(sites_doc, list) or not sites_doc:
            raise FormatError(path, f"{where}: needs 'sites' or 'random'")
        sites = [_parse_site(s, f"{where}.sites[{k}]", path)
                 for k, s in enumerate(sites_doc)]
    try:
        return Fault(model, sites, duration)
    except ValueError as exc:
        raise FormatError(path, f"{where}: {exc}") from exc


def _parse_options(doc, path):
    if doc is None:
        return CampaignOptions()
    if not isinstance(doc, dict):
        raise FormatError(path, "options must be an object")
    known = {f for f in CampaignOptions.__dataclass_fields__}
    unknown = set(doc) - known
    if unknown:
        raise FormatError(path, f"unknown options: {sorted(unknown)}")
    try:
        return CampaignOptions(**doc)
    except (TypeError, ValueError) as exc:
        raise FormatError(path, f"bad options: {exc}") from exc


@dataclass
class ParsedCampaign:
    net: Network
    campaign: Campaign
    model_path: str
    dataset_path: str | None


def parse_campaign(path) -> ParsedCampaign:
    """Build a ready-to-run Campaign from a config file.

    Site validity is not judged here: invalid faults are dropped with a
    warning during the campaign's preparation stage.
    """
    doc = _load_json(path, "campaign")
    base = os.path.dirname(os.path.abspath(path))
    try:
        model_rel = str(doc["model"])
    except (KeyError, TypeError) as exc:
        raise FormatError(path, f"missing model reference: {exc}") from exc
    model_path = os.path.join(base, model_rel)
    net = load_network(model_path)
    dataset_path = (os.path.join(base, str(doc["dataset"]))
                    if doc.get("dataset") else None)
    campaign = Campaign(net, _parse_options(doc.get("options"), path))
    rounds_doc = doc.get("rounds", [])
    if not isinstance(rounds_doc, list):
        raise FormatError(path, "rounds must be a list")
    for r_i, round_doc in enumerate(rounds_doc):
        where = f"rounds[{r_i}]"
        if not isinstance(round_doc, dict) or "faults" not in round_doc:
            raise FormatError(path, f"{where}: needs a 'faults' list")
        faults = [_parse_fault(f, f"{where}.faults[{k}]", path, net)
                  for k, f in enumerate(round_doc["faults"])]
        campaign.then_inject(*faults)
    for c_i, comp in enumerate(doc.get("complete", [])):
        where = f"complete[{c_i}]"
        if not isinstance(comp, dict):
            raise FormatError(path, f"{where}: must be an object")
        try:
            model = model_from_config(comp["model"])
            campaign.inject_complete(model, comp["layer"])
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(path, f"{where}: {exc}") from exc
    return ParsedCampaign(net, campaign, model_path, dataset_path)


def save_campaign_config(path, model_file, dataset_file=None, options=None,
                         rounds=None, complete=None) -> None:
    """rounds: list of fault-dict lists; complete: list of {model, layer}."""
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": "campaign",
        "model": model_file,
    }
    if dataset_file:
        doc["dataset"] = dataset_file
    if options is not None:
        doc["options"] = options.describe() if isinstance(options, CampaignOptions) else options
    if rounds:
        doc["rounds"] = [{"faults": faults} for faults in rounds]
    if complete:
        doc["complete"] = complete
    _write_json(path, doc)


# ---------------------------------------------------------------------------
# Results


def rle_encode(values: np.ndarray) -> list:
    """Run-length pairs [value, run] over the C-order flattened matrix."""
    flat = np.asarray(values, dtype=np.float64).ravel()
    if flat.size == 0:
        return []
    boundaries = np.nonzero(np.diff(flat))[0] + 1
    starts = np.concatenate(([0], boundaries))
    ends = np.concatenate((boundaries, [flat.size]))
    return [[float(flat[s]), int(e - s)] for s, e in zip(starts, ends)]


def rle_decode(pairs, shape) -> np.ndarray:
    total = int(np.prod(shape))
    out = np.empty(total, dtype=np.float64)
    pos = 0
    for value, run in pairs:
        run = int(run)
        if run < 1 or pos + run > total:
            raise ValueError(f"run-length data does not fit shape {shape}")
        out[pos: pos + run] = float(value)
        pos += run
    if pos != total:
        raise ValueError(f"run-length data short of shape {shape}")
    return out.reshape(shape)


def export_results(results: CampaignResults, path) -> None:
    rounds_doc = []
    for rnd in results.rounds:
        entry = {
            "faults": rnd.faults,
            "accuracy": rnd.accuracy,
            "label": rnd.label,
            "predictions": list(rnd.predictions),
            "counters": rnd.counters,
        }
        if rnd.outputs is not None:
            entry["outputs"] = [{"shape": list(o.shape), "rle": rle_encode(o)}
                                for o in rnd.outputs]
        rounds_doc.append(entry)
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": "results",
        "golden_accuracy": results.golden_accuracy,
        "num_samples": results.num_samples,
        "golden_predictions": list(results.golden_predictions),
        "options": results.options,
        "warnings": list(results.warnings),
        "runtime_s": results.runtime_s,
        "golden_layer_evals": results.golden_layer_evals,
        "rounds": rounds_doc,
    }
    _write_json(path, doc)


def load_results(path) -> CampaignResults:
    doc = _load_json(path, "results")
    try:
        rounds = []
        for r_i, entry in enumerate(doc["rounds"]):
            outputs = None
            if "outputs" in entry:
                outputs = [rle_decode(o["rle"], tuple(o["shape"]))
                           for o in entry["outputs"]]
            rounds.append(RoundResult(
                faults=entry["faults"],
                accuracy=float(entry["accuracy"]),
                label=str(entry["label"]),
                predictions=[int(v) for v in entry["predictions"]],
                counters={k: int(v) for k, v in entry["counters"].items()},
                outputs=outputs,
            ))
        return CampaignResults(
            golden_accuracy=float(doc["golden_accuracy"]),
            num_samples=int(doc["num_samples"]),
            rounds=rounds,
            golden_predictions=[int(v) for v in doc["golden_predictions"]],
            options=dict(doc["options"]),
            warnings=[str(w) for w in doc["warnings"]],
            runtime_s=float(doc["runtime_s"]),
            golden_layer_evals=int(doc["golden_layer_evals"]),
        )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise FormatError(path, f"bad results document: {exc}") from exc


# ---------------------------------------------------------------------------
# Flattened plot data for the visualization scripts


def _round_site(rnd_doc):
    faults = rnd_doc.get("faults") or [{}]
    sites = faults[0].get("sites") or [{}]
    return faults[0], sites[0]


def export_plot_data(results_paths, kind, path, layer=None) -> dict:
    """Flatten one or more results files into plot-ready entries.

    bar          per-layer accuracy lists, one series per fault model
    heat         per-synapse accuracies of single-synapse rounds
    param_curve  accuracy stats as a function of the parameter scale,
                 pooling rounds per results file by their rho
    counters     per-round work counters
    """
    if isinstance(results_paths, (str, os.PathLike)):
        results_paths = [results_paths]
    docs = [_load_json(p, "results") for p in results_paths]
    out = {"format_version": FORMAT_VERSION, "kind": "plotdata", "plot_kind": kind,
           "golden_accuracy": docs[0]["golden_accuracy"]}
    try:
        if kind == "bar":
            entries = []
            for doc in docs:
                per_series: dict[tuple, list] = {}
                for rnd in doc["rounds"]:
                    fault, site = _round_site(rnd)
                    key = (fault.get("model", {}).get("name", "?"),
                           str(site.get("layer", "?")))
                    per_series.setdefault(key, []).append(rnd["accuracy"])
                for (series, lyr), accs in per_series.items():
                    entries.append({"series": series, "layer": lyr,
                                    "accuracies": accs})
            out["entries"] = entries
        elif kind == "heat":
            raw = []
            for doc in docs:
                for rnd in doc["rounds"]:
                    fault, site = _round_site(rnd)
                    if "synapse" not in site:
                        continue
                    if layer is not None and site.get("layer") != layer:
                        continue
                    raw.append((tuple(int(v) for v in site["synapse"]),
                                rnd["accuracy"], rnd["label"]))
            if not raw:
                raise FormatError(path, "no single-synapse rounds to plot")
            # row: post-synaptic index; col: pre-synaptic index (dense) or
            # the rank of the (in_ch, ky, kx) tap among those observed
            tails = sorted({idx[1:] for idx, _, _ in raw})
            col_of = {tail: tail[0] if len(tail) == 1 else rank
                      for rank, tail in enumerate(tails)}
            out["entries"] = [
                {"row": idx[0], "col": int(col_of[idx[1:]]),
                 "synapse": list(idx), "accuracy": acc, "label": lbl}
                for idx, acc, lbl in raw
            ]
        elif kind == "param_curve":
            by_rho: dict[float, list] = {}
            param_names = set()
            for doc in docs:
                for rnd in doc["rounds"]:
                    fault, _ = _round_site(rnd)
                    model = fault.get("model", {})
                    if model.get("name") != "param_scale":
                        continue
                    param_names.add(model.get("param", "?"))
                    by_rho.setdefault(float(model["rho"]), []).append(rnd["accuracy"])
            if not by_rho:
                raise FormatError(path, "no parametric rounds to plot")
            out["param"] = sorted(param_names)[0]
            out["entries"] = [
                {"rho": rho, "mean": float(np.mean(accs)),
                 "min": float(min(accs)), "max": float(max(accs))}
                for rho, accs in sorted(by_rho.items())
            ]
        elif kind == "counters":
            entries = []
            for doc in docs:
                for r_i, rnd in enumerate(doc["rounds"]):
                    entry = {"round": r_i}
                    entry.update(rnd["counters"])
                    entries.append(entry)
            out["entries"] = entries
            out["golden_layer_evals"] = sum(d["golden_layer_evals"] for d in docs)
        else:
            raise FormatError(path, f"unknown plot kind {kind!r}")
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(path, f"cannot flatten results: {exc}") from exc
    _write_json(path, out)
    return out


def load_plot_data(path) -> dict:
    return _load_json(path, "plotdata")
