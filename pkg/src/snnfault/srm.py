"""Discrete-time simulation of spike-response-model (SRM) neurons.

A network is a chain of layers (dense, 2-D convolution, sum-pooling)
evaluated on a global clock with period ``period_ms`` and ``num_steps``
ticks.  Each spiking neuron integrates a synaptic kernel response to its
inputs plus a refractory kernel response to its own output spikes:

    u(t) = sum_i w_i * (eps * S_i)(t) + (eta * S_o)(t) + u_rest

with eps(s) = (s/tau_s) * exp(1 - s/tau_s) for s > 0 (peak 1 at s = tau_s)
and eta(s) = -2*theta * (s/tau_ref) * exp(1 - s/tau_ref) for s > 0.  A
neuron emits a spike at the first grid point where u >= theta; the reset
is carried entirely by the refractory kernel.

Spike records are (N, d) float matrices: one row per flattened neuron,
one column per clock tick.  Unfaulted spiking layers produce 0/1 entries;
sum-pooling produces integer counts and stuck-at faults may introduce
arbitrary graded values.  A graded entry v behaves as v simultaneous unit
spikes (the synaptic contribution scales linearly).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Clock",
    "NeuronParams",
    "SpikeRecord",
    "LayerSpec",
    "Network",
    "MembraneTrace",
    "KERNEL_TRUNCATION_REL",
    "eval_kernel",
    "kernel_on_grid",
    "filtered_input",
    "drive_from_filtered",
    "threshold_dynamics",
    "simulate_layer_neurons",
    "sumpool_forward",
    "network_forward",
    "dense",
    "conv2d",
    "sumpool",
]

# Grid kernels are cut at the first post-peak lag whose magnitude falls
# below this fraction of the analytic peak.
KERNEL_TRUNCATION_REL = 1e-6

# A membrane trace is an (N, d) array of potentials on the clock grid.
MembraneTrace = np.ndarray


@dataclass(frozen=True)
class Clock:
    """Global simulation clock: ticks t_j = j * period_ms, j = 1..num_steps."""

    period_ms: float
    num_steps: int

    def __post_init__(self):
        if not (math.isfinite(self.period_ms) and self.period_ms > 0):
            raise ValueError(f"clock period must be finite and > 0, got {self.period_ms}")
        if self.num_steps < 1:
            raise ValueError(f"num_steps must be >= 1, got {self.num_steps}")

    @property
    def timestamps_ms(self) -> np.ndarray:
        return np.arange(1, self.num_steps + 1, dtype=np.float64) * self.period_ms


@dataclass(frozen=True)
class NeuronParams:
    """Per-layer SRM constants (all neurons of a layer share them)."""

    tau_s: float
    tau_ref: float
    theta: float
    u_rest: float = 0.0

    def __post_init__(self):
        for name in ("tau_s", "tau_ref", "theta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v}")
        if not math.isfinite(self.u_rest):
            raise ValueError(f"u_rest must be finite, got {self.u_rest}")


@dataclass
class SpikeRecord:
    """Per-layer spike matrix: values[i, j] is neuron i's output at tick j+1.

    ``grid`` keeps the (channels, height, width) interpretation of the rows
    so convolution and pooling layers can recover spatial structure.
    """

    layer_id: str
    values: np.ndarray
    grid: tuple[int, int, int] | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError(f"spike record must be 2-D, got shape {self.values.shape}")
        if self.grid is not None and int(np.prod(self.grid)) != self.values.shape[0]:
            raise ValueError(
                f"grid {self.grid} does not match {self.values.shape[0]} rows"
            )

    @property
    def num_neurons(self) -> int:
        return self.values.shape[0]

    @property
    def num_steps(self) -> int:
        return self.values.shape[1]

    def copy(self) -> "SpikeRecord":
        return SpikeRecord(self.layer_id, self.values.copy(), self.grid)

    def spatial(self) -> np.ndarray:
        """Return the values as a (c, y, x, d) view/copy."""
        if self.grid is None:
            raise ValueError(f"record {self.layer_id!r} has no spatial grid")
        c, y, x = self.grid
        return self.values.reshape(c, y, x, self.num_steps)


@dataclass
class LayerSpec:
    """One layer of the network.

    kind        "dense", "conv2d" or "sumpool"
    input_shape (channels, height, width) consumed by the layer
    output_shape derived (channels, height, width)
    weights     dense: (n_out, n_in) float32; conv2d: (oc, ic, kh, kw) float32
    params      NeuronParams for spiking layers, None for sumpool
    """

    name: str
    kind: str
    input_shape: tuple[int, int, int]
    output_shape: tuple[int, int, int] = field(init=False)
    weights: np.ndarray | None = None
    params: NeuronParams | None = None
    stride: int = 1
    padding: int = 0
    pool: tuple[int, int] | None = None
    quantizer_range: tuple[float, float] | None = None

    def __post_init__(self):
        c, y, x = self.input_shape
        if c < 1 or y < 1 or x < 1:
            raise ValueError(f"layer {self.name!r}: bad input shape {self.input_shape}")
        if self.kind == "dense":
            if self.weights is None or self.params is None:
                raise ValueError(f"dense layer {self.name!r} needs weights and params")
            self.weights = np.asarray(self.weights, dtype=np.float32)
            n_in = c * y * x
            if self.weights.ndim != 2 or self.weights.shape[1] != n_in:
                raise ValueError(
                    f"layer {self.name!r}: weights {self.weights.shape} do not match "
                    f"{n_in} inputs"
                )
            self.output_shape = (self.weights.shape[0], 1, 1)
        elif self.kind == "conv2d":
            if self.weights is None or self.params is None:
                raise ValueError(f"conv2d layer {self.name!r} needs weights and params")
            self.weights = np.asarray(self.weights, dtype=np.float32)
            if self.weights.ndim != 4 or self.weights.shape[1] != c:
                raise ValueError(
                    f"layer {self.name!r}: conv weights {self.weights.shape} do not "
                    f"match {c} input channels"
                )
            oc, _, kh, kw = self.weights.shape
            if self.stride < 1 or self.padding < 0:
                raise ValueError(f"layer {self.name!r}: bad stride/padding")
            oy = (y + 2 * self.padding - kh) // self.stride + 1
            ox = (x + 2 * self.padding - kw) // self.stride + 1
            if oy < 1 or ox < 1:
                raise ValueError(
                    f"layer {self.name!r}: kernel {kh}x{kw} does not fit input "
                    f"{y}x{x} (padding {self.padding})"
                )
            self.output_shape = (oc, oy, ox)
        elif self.kind == "sumpool":
            if self.weights is not None or self.params is not None:
                raise ValueError(f"sumpool layer {self.name!r} carries no weights/params")
            if self.pool is None:
                raise ValueError(f"sumpool layer {self.name!r} needs a pool window")
            ph, pw = self.pool
            if ph < 1 or pw < 1:
                raise ValueError(f"layer {self.name!r}: bad pool window {self.pool}")
            if y % ph or x % pw:
                raise ValueError(
                    f"layer {self.name!r}: input {y}x{x} not divisible by "
                    f"window {ph}x{pw}"
                )
            self.output_shape = (c, y // ph, x // pw)
        else:
            raise ValueError(f"unknown layer kind {self.kind!r}")

    @property
    def num_inputs(self) -> int:
        return int(np.prod(self.input_shape))

    @property
    def num_neurons(self) -> int:
        """Flattened output size (sumpool cells are not neurons but count here)."""
        return int(np.prod(self.output_shape))

    @property
    def is_spiking(self) -> bool:
        return self.kind in ("dense", "conv2d")

    def num_synapses(self) -> int:
        return 0 if self.weights is None else int(self.weights.size)


def dense(name, input_shape, num_neurons, weights, params,
          quantizer_range=None) -> LayerSpec:
    weights = np.asarray(weights, dtype=np.float32).reshape(num_neurons, -1)
    return LayerSpec(name=name, kind="dense", input_shape=tuple(input_shape),
                     weights=weights, params=params, quantizer_range=quantizer_range)


def conv2d(name, input_shape, weights, params, stride=1, padding=0,
           quantizer_range=None) -> LayerSpec:
    return LayerSpec(name=name, kind="conv2d", input_shape=tuple(input_shape),
                     weights=np.asarray(weights, dtype=np.float32), params=params,
                     stride=stride, padding=padding, quantizer_range=quantizer_range)


def sumpool(name, input_shape, window) -> LayerSpec:
    return LayerSpec(name=name, kind="sumpool", input_shape=tuple(input_shape),
                     pool=tuple(window))


@dataclass
class Network:
    """Ordered chain of layers plus the clock and the output class count."""

    layers: list[LayerSpec]
    clock: Clock
    num_classes: int

    def __post_init__(self):
        if not self.layers:
            raise ValueError("network needs at least one layer")
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.output_shape != nxt.input_shape:
                raise ValueError(
                    f"layer {nxt.name!r} input {nxt.input_shape} does not chain "
                    f"from {prev.name!r} output {prev.output_shape}"
                )
        last = self.layers[-1]
        if last.kind != "dense" or last.num_neurons != self.num_classes:
            raise ValueError(
                f"final layer must be dense with {self.num_classes} neurons, "
                f"got {last.kind} with {last.num_neurons}"
            )
        names = [l.name for l in self.layers]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate layer names: {names}")

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    @property
    def input_shape(self) -> tuple[int, int, int]:
        return self.layers[0].input_shape

    def layer_index(self, ref) -> int:
        """Resolve a layer reference (index or name) to an index."""
        if isinstance(ref, (int, np.integer)):
            if not 0 <= ref < len(self.layers):
                raise KeyError(f"no such layer index: {ref}")
            return int(ref)
        for i, layer in enumerate(self.layers):
            if layer.name == ref:
                return i
        raise KeyError(f"no such layer: {ref!r}")


# ---------------------------------------------------------------------------
# Kernels


def _kernel_shape(lag: np.ndarray, tau: float) -> np.ndarray:
    """(s/tau) * exp(1 - s/tau) for s > 0, else 0.  Peak 1 at s = tau."""
    lag = np.asarray(lag, dtype=np.float64)
    out = np.zeros_like(lag)
    pos = lag > 0
    x = lag[pos] / tau
    out[pos] = x * np.exp(1.0 - x)
    return out


def eval_kernel(kind: str, lag_ms: float, params: NeuronParams) -> float:
    """Evaluate the synaptic (eps) or refractory (eta) kernel at one lag."""
    if not math.isfinite(lag_ms):
        raise ValueError(f"kernel lag must be finite, got {lag_ms}")
    if kind == "synaptic":
        return float(_kernel_shape(np.array([lag_ms]), params.tau_s)[0])
    if kind == "refractory":
        return float(-2.0 * params.theta
                     * _kernel_shape(np.array([lag_ms]), params.tau_ref)[0])
    raise ValueError(f"unknown kernel kind {kind!r}")


def kernel_on_grid(kind: str, params: NeuronParams, clock: Clock,
                   rel_cutoff: float = KERNEL_TRUNCATION_REL) -> np.ndarray:
    """Kernel sampled at lags 0, T, 2T, ... truncated past the decaying tail.

    The tail is cut at the first post-peak lag whose magnitude drops below
    rel_cutoff times the analytic peak (1 for eps, 2*theta for eta); lags
    beyond num_steps-1 are never used and are not materialized.
    """
    lags = np.arange(clock.num_steps, dtype=np.float64) * clock.period_ms
    if kind == "synaptic":
        vals = _kernel_shape(lags, params.tau_s)
        peak = 1.0
    elif kind == "refractory":
        vals = -2.0 * params.theta * _kernel_shape(lags, params.tau_ref)
        peak = 2.0 * params.theta
    else:
        raise ValueError(f"unknown kernel kind {kind!r}")
    mags = np.abs(vals)
    ipeak = int(np.argmax(mags))
    tail = np.nonzero(mags[ipeak + 1:] < rel_cutoff * peak)[0]
    if tail.size:
        vals = vals[: ipeak + 1 + tail[0]]
    return vals


# ---------------------------------------------------------------------------
# Layer evaluation


def filtered_input(values: np.ndarray, tau_s: float, clock: Clock,
                   rel_cutoff: float = KERNEL_TRUNCATION_REL) -> np.ndarray:
    """Convolve each input row with the synaptic kernel for this tau_s.

    Returns E with E[i, j] = sum_k eps(k*T) * values[i, j-k]; this is the
    per-input drive before the weights are applied.
    """
    values = np.asarray(values, dtype=np.float64)
    d = values.shape[1]
    eps = _kernel_shape(np.arange(d, dtype=np.float64) * clock.period_ms, tau_s)
    mags = np.abs(eps)
    ipeak = int(np.argmax(mags))
    tail = np.nonzero(mags[ipeak + 1:] < rel_cutoff)[0]
    if tail.size:
        eps = eps[: ipeak + 1 + tail[0]]
    out = np.zeros_like(values)
    for k in range(1, len(eps)):  # eps[0] == 0
        if eps[k] != 0.0:
            out[:, k:] += eps[k] * values[:, : d - k]
    return out


def conv_tap_patch(layer: LayerSpec, filtered: np.ndarray, in_ch: int,
                   ky: int, kx: int) -> np.ndarray:
    """Slice of the padded filtered input seen by kernel tap (in_ch, ky, kx).

    Returns an (oy, ox, d) array: the pre-synaptic signal each output
    position integrates through that single kernel weight.
    """
    c, y, x = layer.input_shape
    oc, oy, ox = layer.output_shape
    d = filtered.shape[1]
    maps = filtered.reshape(c, y, x, d)
    p, s = layer.padding, layer.stride
    if p:
        maps = np.pad(maps, ((0, 0), (p, p), (p, p), (0, 0)))
    return maps[in_ch, ky: ky + oy * s: s, kx: kx + ox * s: s, :]


def drive_from_filtered(layer: LayerSpec, filtered: np.ndarray) -> np.ndarray:
    """Apply the layer's connectivity to the kernel-filtered input."""
    if layer.kind == "dense":
        return layer.weights @ filtered
    if layer.kind == "conv2d":
        c, y, x = layer.input_shape
        oc, oy, ox = layer.output_shape
        _, _, kh, kw = layer.weights.shape
        d = filtered.shape[1]
        maps = filtered.reshape(c, y, x, d)
        p, s = layer.padding, layer.stride
        if p:
            maps = np.pad(maps, ((0, 0), (p, p), (p, p), (0, 0)))
        drive = np.zeros((oc, oy, ox, d), dtype=np.float64)
        for ic in range(c):
            for ky in range(kh):
                for kx in range(kw):
                    patch = maps[ic, ky: ky + oy * s: s, kx: kx + ox * s: s, :]
                    drive += layer.weights[:, ic, ky, kx].astype(np.float64)[
                        :, None, None, None] * patch[None]
        return drive.reshape(oc * oy * ox, d)
    raise ValueError(f"layer kind {layer.kind!r} has no synaptic drive")


def threshold_dynamics(drive: np.ndarray, params: NeuronParams, clock: Clock,
                       rel_cutoff: float = KERNEL_TRUNCATION_REL,
                       ) -> tuple[np.ndarray, MembraneTrace]:
    """Run the threshold/refractory loop over the grid for a whole layer.

    drive is the (N, d) summed synaptic input.  Returns the binary output
    matrix and the membrane trace u (before-spike potentials; eta(0) = 0 so
    the tick of a spike is unaffected by that spike).
    """
    drive = np.asarray(drive, dtype=np.float64)
    if not np.isfinite(drive).all():
        raise FloatingPointError("synaptic drive overflowed to non-finite values")
    n, d = drive.shape
    eta = kernel_on_grid("refractory", params, clock, rel_cutoff)
    out = np.zeros((n, d), dtype=np.float64)
    refr = np.zeros((n, d), dtype=np.float64)
    trace = np.empty((n, d), dtype=np.float64)
    klen = len(eta)
    for j in range(d):
        u = drive[:, j] + refr[:, j] + params.u_rest
        trace[:, j] = u
        fired = u >= params.theta
        if fired.any():
            out[fired, j] = 1.0
            span = min(klen, d - j)
            if span > 1:
                refr[fired, j: j + span] += eta[:span]
    return out, trace


def simulate_layer_neurons(layer: LayerSpec, input_record: SpikeRecord,
                           clock: Clock) -> tuple[SpikeRecord, MembraneTrace]:
    """Evaluate one spiking layer: synaptic drive, then threshold dynamics."""
    if not layer.is_spiking:
        raise ValueError(f"layer {layer.name!r} has no neurons to simulate")
    _check_input(layer, input_record, clock)
    filt = filtered_input(input_record.values, layer.params.tau_s, clock)
    drive = drive_from_filtered(layer, filt)
    values, trace = threshold_dynamics(drive, layer.params, clock)
    return SpikeRecord(layer.name, values, layer.output_shape), trace


def sumpool_forward(layer: LayerSpec, input_record: SpikeRecord) -> SpikeRecord:
    """Sum non-overlapping spatial windows at every tick (no thresholding)."""
    if layer.kind != "sumpool":
        raise ValueError(f"layer {layer.name!r} is not a sum-pooling layer")
    c, y, x = layer.input_shape
    if input_record.num_neurons != layer.num_inputs:
        raise ValueError(
            f"layer {layer.name!r}: record has {input_record.num_neurons} rows, "
            f"expected {layer.num_inputs}"
        )
    ph, pw = layer.pool
    d = input_record.num_steps
    maps = input_record.values.reshape(c, y, x, d)
    pooled = maps.reshape(c, y // ph, ph, x // pw, pw, d).sum(axis=(2, 4))
    return SpikeRecord(layer.name, pooled.reshape(-1, d), layer.output_shape)


def _check_input(layer: LayerSpec, record: SpikeRecord, clock: Clock) -> None:
    if record.num_neurons != layer.num_inputs:
        raise ValueError(
            f"layer {layer.name!r}: record has {record.num_neurons} rows, "
            f"expected {layer.num_inputs}"
        )
    if record.num_steps != clock.num_steps:
        raise ValueError(
            f"layer {layer.name!r}: record spans {record.num_steps} ticks, "
            f"clock has {clock.num_steps}"
        )


def network_forward(net: Network, input_record: SpikeRecord,
                    start_layer: int = 0, seed_record: SpikeRecord | None = None,
                    stop_layer: int | None = None) -> list[SpikeRecord]:
    """Evaluate layers start_layer..stop_layer (inclusive), in order.

    When start_layer > 0, seed_record must hold the output of layer
    start_layer - 1.  Returns the records produced, one per evaluated layer.
    """
    if stop_layer is None:
        stop_layer = net.num_layers - 1
    if not 0 <= start_layer <= stop_layer < net.num_layers:
        raise ValueError(f"bad layer range {start_layer}..{stop_layer}")
    if start_layer == 0:
        current = input_record
    else:
        if seed_record is None:
            raise ValueError("late start needs the previous layer's record as seed")
        current = seed_record
    produced = []
    for idx in range(start_layer, stop_layer + 1):
        layer = net.layers[idx]
        if layer.kind == "sumpool":
            current = sumpool_forward(layer, current)
        else:
            current, _ = simulate_layer_neurons(layer, current, net.clock)
        produced.append(current)
    return produced
