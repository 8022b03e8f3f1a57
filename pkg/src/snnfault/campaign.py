"""Fault-injection campaign engine.

A campaign holds fault rounds against one network.  Running it on a
labelled dataset performs, per batch:

    1. one nominal (golden) inference per sample, caching every layer's
       spike record;
    2. per fault round, a faulty inference per sample that
       - starts at the leftmost faulty layer, seeded from the golden
         cache (late start); rounds whose leftmost layer holds only hard
         neuron faults start one layer later, rewriting the cached record;
       - applies weight faults as drive corrections before the layer
         fires, parametric faults by splicing rows from a recomputed
         duplicate of the layer, and output faults by rewriting rows of
         the produced record;
       - compares the rightmost faulty layer's record against the golden
         one and stops early when they agree within the tolerance, in
         which case the golden output stands in for the faulty one.

Faults are withdrawn between rounds (evaluation is purely functional, so
nothing needs restoring), per-round accuracy is aggregated over all
samples, and each round is labelled critical when its accuracy drop
exceeds the misprediction tolerance.  Work is reported as layer
evaluations and optimization hit counts rather than wall-clock speedups.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from snnfault.srm import (
    Network,
    SpikeRecord,
    drive_from_filtered,
    filtered_input,
    conv_tap_patch,
    sumpool_forward,
    threshold_dynamics,
)
from snnfault.faults import (
    Fault,
    FaultModel,
    Quantizer,
    NEURON_OUTPUT,
    NEURON_PARAM,
    SYNAPSE_WEIGHT,
    assign_random_sites,
    neuron_site_candidates,
    synapse_site_candidates,
    validate_site,
)

__all__ = [
    "Sample",
    "CampaignOptions",
    "FaultRound",
    "GoldenCache",
    "RoundResult",
    "CampaignResults",
    "Campaign",
    "decode_rate",
    "early_stop_check",
    "golden_run",
]

log = logging.getLogger(__name__)


@dataclass
class Sample:
    """One labelled input: (num_inputs, num_steps) spike values."""

    values: np.ndarray
    label: int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError(f"sample values must be 2-D, got {self.values.shape}")


@dataclass
class CampaignOptions:
    late_start: bool = True
    early_stop: bool = True
    early_stop_tolerance: float = 0.0
    batch_size: int = 32
    parallel: bool = False
    save_outputs: bool = False
    misprediction_tolerance: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.early_stop_tolerance < 0:
            raise ValueError("early-stop tolerance must be >= 0")
        if self.misprediction_tolerance < 0:
            raise ValueError("misprediction tolerance must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")

    def describe(self) -> dict:
        return {
            "late_start": self.late_start,
            "early_stop": self.early_stop,
            "early_stop_tolerance": self.early_stop_tolerance,
            "batch_size": self.batch_size,
            "parallel": self.parallel,
            "save_outputs": self.save_outputs,
            "misprediction_tolerance": self.misprediction_tolerance,
            "rng_seed": self.rng_seed,
        }


@dataclass
class FaultRound:
    """Faults evaluated together in one inference; prepared before running."""

    faults: list[Fault] = field(default_factory=list)
    # derived by prepare():
    placements: list = field(default_factory=list)  # (layer_idx, fault, site)
    l_left: int = -1
    l_right: int = -1
    hard_neuron_only_leftmost: bool = False


@dataclass
class GoldenCache:
    """Per-sample golden records of every layer, plus decode results."""

    records: list[list[SpikeRecord]]
    predictions: list[int]
    num_correct: int


@dataclass
class RoundResult:
    faults: list[dict]
    accuracy: float = 0.0
    label: str = "benign"
    predictions: list[int] = field(default_factory=list)
    counters: dict = field(default_factory=dict)
    outputs: list[np.ndarray] | None = None


@dataclass
class CampaignResults:
    golden_accuracy: float
    num_samples: int
    rounds: list[RoundResult]
    golden_predictions: list[int]
    options: dict
    warnings: list[str]
    runtime_s: float
    golden_layer_evals: int


def decode_rate(record: SpikeRecord | np.ndarray) -> int:
    """Rate decode: class whose output row has the largest spike count.

    Ties break to the lowest class index.
    """
    values = record.values if isinstance(record, SpikeRecord) else np.asarray(record)
    return int(np.argmax(values.sum(axis=1)))


def early_stop_check(a_golden: SpikeRecord, a_faulty: SpikeRecord,
                     tol: float) -> bool:
    """Stop when the element-wise 1-norm of (golden - faulty) is within tol."""
    if a_golden.values.shape != a_faulty.values.shape:
        raise ValueError(
            f"record shapes differ: {a_golden.values.shape} vs {a_faulty.values.shape}")
    return float(np.abs(a_golden.values - a_faulty.values).sum()) <= tol


def golden_run(net: Network, samples: list[Sample]) -> GoldenCache:
    """Nominal forward pass per sample, caching every layer's record."""
    records, predictions, correct = [], [], 0
    for sample in samples:
        recs = _forward_all(net, sample.values)
        records.append(recs)
        pred = decode_rate(recs[-1])
        predictions.append(pred)
        correct += int(pred == sample.label)
    return GoldenCache(records, predictions, correct)


def _forward_all(net: Network, values: np.ndarray) -> list[SpikeRecord]:
    from snnfault.srm import network_forward

    rec = SpikeRecord("input", values, net.input_shape)
    return network_forward(net, rec)


# ---------------------------------------------------------------------------
# Faulty layer evaluation


class _QuantizerCache:
    """Per-layer quantizers; default range spans the layer's trained weights."""

    def __init__(self):
        self._cache = {}

    def get(self, layer, width: int) -> Quantizer:
        key = (layer.name, width)
        if key not in self._cache:
            if layer.quantizer_range is not None:
                lo, hi = layer.quantizer_range
            else:
                lo = float(layer.weights.min())
                hi = float(layer.weights.max())
                if lo == hi:  # degenerate distribution; widen symmetrically
                    lo, hi = lo - 0.5, hi + 0.5
            self._cache[key] = Quantizer(width, lo, hi)
        return self._cache[key]


def _flat_neuron(position, shape) -> int:
    return int(np.ravel_multi_index(position, shape))


def _compose_weight_series(layer, placements, quantizers, d, counters):
    """Compose all weight faults per synapse into per-tick weight series.

    Returns {index: (nominal, series)}; faults compose in declaration order
    and only rewrite ticks inside their own active window.
    """
    out: dict[tuple, tuple[float, np.ndarray]] = {}
    for fault, site in placements:
        idx = site.index
        if idx not in out:
            w0 = float(layer.weights[idx])
            out[idx] = (w0, np.full(d, w0))
        _, series = out[idx]
        mask = fault.duration.active_mask(d)
        q = None
        if fault.model.name == "bitflip_synapse":
            q = quantizers.get(layer, fault.model.args[1])
        clamped = False
        for t in np.nonzero(mask)[0]:
            if q is not None and q.clamps(series[t]):
                clamped = True
            series[t] = fault.model.apply_weight(float(series[t]), q)
        if clamped:
            counters["weight_clamps"] += 1
    return out


def _weight_delta(layer, filtered, series_by_site):
    """Drive correction for time-varying faulty weights.

    The weight multiplies the kernel-filtered pre-synaptic signal at every
    tick, so the correction for one synapse is (w_hat(t) - w) * E_pre(t).
    """
    d = filtered.shape[1]
    n_out = layer.num_neurons
    if layer.kind == "dense":
        delta = np.zeros((n_out, d))
        for (o, i), (w0, series) in series_by_site.items():
            delta[o] += (series - w0) * filtered[i]
        return delta
    oc, oy, ox = layer.output_shape
    delta = np.zeros((oc, oy, ox, d))
    for (o, i, ky, kx), (w0, series) in series_by_site.items():
        patch = conv_tap_patch(layer, filtered, i, ky, kx)
        delta[o] += (series - w0)[None, None, :] * patch
    return delta.reshape(n_out, d)


def _eval_layer_with_faults(net, layer_idx, in_record, placements, quantizers,
                            counters) -> SpikeRecord:
    """Evaluate one layer under the round's faults placed at this layer."""
    layer = net.layers[layer_idx]
    clock = net.clock
    d = clock.num_steps
    here = [(f, s) for (li, f, s) in placements if li == layer_idx]
    if layer.kind == "sumpool":
        return sumpool_forward(layer, in_record)

    weight_here = [(f, s) for f, s in here if f.model.target == SYNAPSE_WEIGHT]
    param_here = [(f, s) for f, s in here if f.model.target == NEURON_PARAM]
    output_here = [(f, s) for f, s in here if f.model.target == NEURON_OUTPUT]

    filtered = filtered_input(in_record.values, layer.params.tau_s, clock)
    series_by_site = (_compose_weight_series(layer, weight_here, quantizers, d, counters)
                      if weight_here else None)

    def drive_for(params):
        filt = (filtered if params.tau_s == layer.params.tau_s
                else filtered_input(in_record.values, params.tau_s, clock))
        drive = drive_from_filtered(layer, filt)
        if series_by_site:
            drive = drive + _weight_delta(layer, filt, series_by_site)
        return drive

    values, _ = threshold_dynamics(drive_for(layer.params), layer.params, clock)

    if param_here:
        # Per-neuron effective params composed in declaration order; one
        # duplicate ("dummy") evaluation per distinct parameter set, with
        # the faulty rows spliced in wherever the fault windows are active.
        eff: dict[int, object] = {}
        masks: dict[int, np.ndarray] = {}
        for fault, site in param_here:
            n = _flat_neuron(site.position, layer.output_shape)
            eff[n] = fault.model.apply_params(eff.get(n, layer.params))
            prev = masks.get(n, np.zeros(d, dtype=bool))
            masks[n] = prev | fault.duration.active_mask(d)
        groups: dict[object, list[int]] = {}
        for n, params in eff.items():
            groups.setdefault(params, []).append(n)
        for params, neurons in groups.items():
            dummy_values, _ = threshold_dynamics(drive_for(params), params, clock)
            counters["dummy_evals"] += 1
            for n in neurons:
                values[n] = np.where(masks[n], dummy_values[n], values[n])

    record = SpikeRecord(layer.name, values, layer.output_shape)
    if output_here:
        _rewrite_outputs(record, output_here)
    return record


def _rewrite_outputs(record: SpikeRecord, placements) -> None:
    """Apply hard neuron-output faults to a record, in declaration order."""
    d = record.num_steps
    shape = record.grid
    for fault, site in placements:
        n = _flat_neuron(site.position, shape)
        record.values[n] = fault.model.apply_output(
            record.values[n], fault.duration.active_mask(d))


# ---------------------------------------------------------------------------
# Round execution


def _run_round_on_sample(net, rnd: FaultRound, sample: Sample,
                         cached: list[SpikeRecord], options: CampaignOptions,
                         quantizers) -> dict:
    """One faulty inference.  Returns prediction, counters and A^L_f."""
    num_layers = net.num_layers
    counters = {"layer_evals": 0, "dummy_evals": 0, "weight_clamps": 0,
                "early_stop_hits": 0, "late_start_hits": 0}
    input_record = SpikeRecord("input", sample.values, net.input_shape)

    stopped = False
    current = None
    if options.late_start and rnd.hard_neuron_only_leftmost:
        start = rnd.l_left + 1
        current = cached[rnd.l_left].copy()
        _rewrite_outputs(current, [(f, s) for (li, f, s) in rnd.placements
                                   if li == rnd.l_left])
        if options.early_stop and rnd.l_right == rnd.l_left:
            stopped = early_stop_check(cached[rnd.l_right], current,
                                       options.early_stop_tolerance)
    elif options.late_start:
        start = rnd.l_left
        current = input_record if start == 0 else cached[start - 1]
    else:
        start = 0
        current = input_record
    if start > 0:
        counters["late_start_hits"] = 1

    if not stopped:
        for idx in range(start, num_layers):
            current = _eval_layer_with_faults(net, idx, current, rnd.placements,
                                              quantizers, counters)
            counters["layer_evals"] += 1
            if options.early_stop and idx == rnd.l_right and idx < num_layers - 1:
                if early_stop_check(cached[idx], current,
                                    options.early_stop_tolerance):
                    stopped = True
                    break
        else:
            # reached the last layer; an early-stop match of the final
            # record still substitutes the golden output
            if (options.early_stop and rnd.l_right == num_layers - 1
                    and early_stop_check(cached[-1], current,
                                         options.early_stop_tolerance)):
                stopped = True

    final = cached[-1] if stopped else current
    counters["early_stop_hits"] = int(stopped)
    return {
        "prediction": decode_rate(final),
        "counters": counters,
        "output": final.values.copy() if options.save_outputs else None,
    }


# ---------------------------------------------------------------------------
# The campaign object


class Campaign:
    """Builds fault rounds against a network and runs them over a dataset."""

    def __init__(self, net: Network, options: CampaignOptions | None = None):
        self.net = net
        self.options = options or CampaignOptions()
        self.rounds: list[FaultRound] = []
        self.last_warnings: list[str] = []

    # -- round construction -------------------------------------------------

    def inject(self, *faults: Fault) -> "Campaign":
        """Add faults to the current (last) round, opening one if needed."""
        if not self.rounds:
            self.rounds.append(FaultRound())
        self.rounds[-1].faults.extend(faults)
        return self

    def then_inject(self, *faults: Fault) -> "Campaign":
        """Open a new round containing the given faults."""
        self.rounds.append(FaultRound(faults=list(faults)))
        return self

    def inject_complete(self, model: FaultModel, layer) -> int:
        """One single-fault round per matching element of the layer.

        Neuron models enumerate neurons; synapse models enumerate synapses.
        Returns the number of rounds added.
        """
        idx = self.net.layer_index(layer)
        if model.target == SYNAPSE_WEIGHT:
            sites = synapse_site_candidates(self.net, idx)
        else:
            sites = neuron_site_candidates(self.net, idx)
        if not sites:
            raise ValueError(
                f"layer {self.net.layers[idx].name!r} has no elements matching "
                f"target {model.target!r}")
        for site in sites:
            self.rounds.append(FaultRound(faults=[Fault(model, site)]))
        return len(sites)

    def eject(self) -> None:
        """Remove all fault rounds; the network itself is never mutated."""
        self.rounds = []
        self.last_warnings = []

    # -- preparation ---------------------------------------------------------

    def prepare(self) -> list[str]:
        """Validate faults, draw random sites, sort and derive round bounds.

        Invalid faults are dropped with a warning; rounds left empty are
        dropped too.  Returns the warning list.
        """
        warnings = []
        rng = np.random.default_rng(self.options.rng_seed)
        d = self.net.clock.num_steps
        prepared = []
        for r_i, rnd in enumerate(self.rounds):
            kept = []
            for fault in rnd.faults:
                fault = self._resolve_random_sites(fault, rng, warnings, r_i)
                if fault is None:
                    continue
                status, reason = validate_site(self.net, fault)
                if status == "dropped":
                    warnings.append(f"round {r_i}: dropped {fault.model.name}: {reason}")
                    continue
                if (not fault.duration.is_permanent) and fault.duration.t2 > d:
                    warnings.append(
                        f"round {r_i}: dropped {fault.model.name}: transient window "
                        f"[{fault.duration.t1}, {fault.duration.t2}] exceeds {d} ticks")
                    continue
                kept.append(fault)
            if not kept:
                warnings.append(f"round {r_i}: empty after validation, dropped")
                continue
            # stable sort: same-layer faults keep declaration order
            kept.sort(key=lambda f: min(self.net.layer_index(s.layer) for s in f.sites))
            placements = [(self.net.layer_index(site.layer), fault, site)
                          for fault in kept for site in fault.sites]
            layers_hit = [li for li, _, _ in placements]
            l_left, l_right = min(layers_hit), max(layers_hit)
            hard_only = all(f.model.is_hard_neuron
                            for li, f, _ in placements if li == l_left)
            prepared.append(FaultRound(faults=kept, placements=placements,
                                       l_left=l_left, l_right=l_right,
                                       hard_neuron_only_leftmost=hard_only))
        if self.options.early_stop and self.options.early_stop_tolerance > 0:
            msg = ("early stop with tolerance > 0 can mask critical faults; "
                   "use with caution")
            warnings.append(msg)
        for w in warnings:
            log.warning(w)
        self.last_warnings = warnings
        self._prepared = prepared
        return warnings

    def _resolve_random_sites(self, fault, rng, warnings, r_i):
        if not any(s.random_pending for s in fault.sites):
            return fault
        # one without-replacement draw per scope so a multi-site fault
        # never lands twice on the same element
        by_scope: dict[object, int] = {}
        for site in fault.sites:
            if site.random_pending:
                by_scope[site.layer] = by_scope.get(site.layer, 0) + 1
        draws: dict[object, list] = {}
        for scope, count in by_scope.items():
            try:
                draws[scope] = assign_random_sites(self.net, fault.model.target,
                                                   scope, count, rng)
            except (ValueError, KeyError) as exc:
                warnings.append(f"round {r_i}: dropped {fault.model.name}: {exc}")
                return None
        resolved = []
        for site in fault.sites:
            if site.random_pending:
                resolved.append(draws[site.layer].pop(0))
            else:
                resolved.append(site)
        return Fault(fault.model, resolved, fault.duration)

    # -- execution -----------------------------------------------------------

    def run(self, dataset: list[Sample]) -> CampaignResults:
        """Preparation + execution + result aggregation over the dataset."""
        if not dataset:
            raise ValueError("campaign needs a non-empty dataset")
        t0 = time.perf_counter()
        self.prepare()
        rounds = self._prepared
        opts = self.options
        quantizers = _QuantizerCache()
        num_layers = self.net.num_layers

        golden_correct = 0
        golden_predictions: list[int] = []
        golden_layer_evals = 0
        acc = [{"correct": 0, "predictions": [],
                "counters": {"layer_evals": 0, "dummy_evals": 0, "weight_clamps": 0,
                             "early_stop_hits": 0, "late_start_hits": 0},
                "outputs": [] if opts.save_outputs else None}
               for _ in rounds]

        for lo in range(0, len(dataset), opts.batch_size):
            batch = dataset[lo: lo + opts.batch_size]
            cache = golden_run(self.net, batch)
            golden_correct += cache.num_correct
            golden_predictions.extend(cache.predictions)
            golden_layer_evals += num_layers * len(batch)

            for r_i, rnd in enumerate(rounds):
                def eval_one(i, _rnd=rnd):
                    return _run_round_on_sample(self.net, _rnd, batch[i],
                                                cache.records[i], opts, quantizers)

                if opts.parallel and len(batch) > 1:
                    with ThreadPoolExecutor(max_workers=min(8, len(batch))) as pool:
                        fragments = list(pool.map(eval_one, range(len(batch))))
                else:
                    fragments = [eval_one(i) for i in range(len(batch))]

                slot = acc[r_i]
                for sample, frag in zip(batch, fragments):
                    slot["correct"] += int(frag["prediction"] == sample.label)
                    slot["predictions"].append(frag["prediction"])
                    for k, v in frag["counters"].items():
                        slot["counters"][k] += v
                    if opts.save_outputs:
                        slot["outputs"].append(frag["output"])

        n = len(dataset)
        golden_accuracy = golden_correct / n
        round_results = []
        for rnd, slot in zip(rounds, acc):
            accuracy = slot["correct"] / n
            label = ("critical"
                     if golden_accuracy - accuracy > opts.misprediction_tolerance
                     else "benign")
            round_results.append(RoundResult(
                faults=[f.describe() for f in rnd.faults],
                accuracy=accuracy,
                label=label,
                predictions=slot["predictions"],
                counters=slot["counters"],
                outputs=slot["outputs"],
            ))
        return CampaignResults(
            golden_accuracy=golden_accuracy,
            num_samples=n,
            rounds=round_results,
            golden_predictions=golden_predictions,
            options=opts.describe(),
            warnings=list(self.last_warnings),
            runtime_s=time.perf_counter() - t0,
            golden_layer_evals=golden_layer_evals,
        )
