"""Fault model library: what can break, where, and for how long.

Nine built-in models cover hard and parametric failures of neurons and
synapses:

    neuron output   dead, saturated, stuck_at(x)
    neuron params   param_scale(tau_s | tau_ref | theta, rho)
    synapse weight  dead, saturated(value), perturbed(rho),
                    bitflip(bits, width) through an affine quantizer

A Fault bundles one model with one or more sites and a duration
(permanent, or transient over an inclusive 1-based tick window [t1, t2]).
Sites may be fully specified, layer-scoped random, or network-scoped
random; random sites are resolved during campaign preparation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from snnfault.srm import Network, NeuronParams

__all__ = [
    "NEURON_OUTPUT",
    "NEURON_PARAM",
    "SYNAPSE_WEIGHT",
    "FaultModel",
    "FaultSite",
    "FaultDuration",
    "Fault",
    "Quantizer",
    "dead_neuron",
    "saturated_neuron",
    "stuck_at",
    "param_scale",
    "dead_synapse",
    "saturated_synapse",
    "perturbed_synapse",
    "bitflip_synapse",
    "register_fault_model",
    "model_from_config",
    "permanent",
    "transient",
    "is_active",
    "faulty_neuron_output",
    "faulty_params",
    "faulty_weight",
    "quantize",
    "dequantize",
    "validate_site",
    "assign_random_sites",
    "neuron_site_candidates",
    "synapse_site_candidates",
]

NEURON_OUTPUT = "neuron_output"
NEURON_PARAM = "neuron_param"
SYNAPSE_WEIGHT = "synapse_weight"

DEFAULT_SATURATION_VALUE = 10.0
PARAM_NAMES = ("tau_s", "tau_ref", "theta")


@dataclass(frozen=True)
class Quantizer:
    """Affine N-bit quantizer over [w_min, w_max], codes 0 .. 2^N - 1."""

    width: int
    w_min: float
    w_max: float

    def __post_init__(self):
        if self.width < 1 or self.width > 32:
            raise ValueError(f"quantizer width must be in 1..32, got {self.width}")
        if not (math.isfinite(self.w_min) and math.isfinite(self.w_max)
                and self.w_min < self.w_max):
            raise ValueError(f"bad quantizer range [{self.w_min}, {self.w_max}]")

    @property
    def levels(self) -> int:
        return (1 << self.width) - 1

    @property
    def step(self) -> float:
        return (self.w_max - self.w_min) / self.levels

    def clamps(self, w: float) -> bool:
        return w < self.w_min or w > self.w_max

    def quantize(self, w: float) -> int:
        """Round half away from zero; out-of-range weights clamp first."""
        w = min(max(w, self.w_min), self.w_max)
        x = (w - self.w_min) / (self.w_max - self.w_min) * self.levels
        return int(math.floor(x + 0.5))  # x >= 0 after the affine map

    def dequantize(self, code: int) -> float:
        if not 0 <= code <= self.levels:
            raise ValueError(f"code {code} outside 0..{self.levels}")
        return self.w_min + code * self.step


def quantize(q: Quantizer, w: float) -> int:
    return q.quantize(w)


def dequantize(q: Quantizer, code: int) -> float:
    return q.dequantize(code)


@dataclass(frozen=True)
class FaultModel:
    """A fault target plus the function perturbing it.

    Built-in models are created through the factory functions below;
    user-defined models pass a callable obeying the same contract as the
    built-in function for their target:

        neuron_output   fn(nominal_row, active_mask) -> new row
        neuron_param    fn(params) -> NeuronParams
        synapse_weight  fn(w, quantizer) -> float
    """

    name: str
    target: str
    args: tuple = ()
    custom: object = None

    def __post_init__(self):
        if self.target not in (NEURON_OUTPUT, NEURON_PARAM, SYNAPSE_WEIGHT):
            raise ValueError(f"unknown fault target {self.target!r}")

    @property
    def is_hard_neuron(self) -> bool:
        """Hard neuron faults rewrite the output record directly."""
        return self.target == NEURON_OUTPUT

    def apply_output(self, nominal: np.ndarray, active: np.ndarray) -> np.ndarray:
        if self.target != NEURON_OUTPUT:
            raise ValueError(f"{self.name} does not target neuron output")
        if self.custom is not None:
            return np.asarray(self.custom(nominal, active), dtype=np.float64)
        row = np.array(nominal, dtype=np.float64)
        if self.name == "dead_neuron":
            row[active] = 0.0
        elif self.name == "saturated_neuron":
            row[active] = 1.0
        elif self.name == "stuck_at":
            row[active] = self.args[0]
        else:
            raise ValueError(f"no output behaviour for {self.name!r}")
        return row

    def apply_params(self, params: NeuronParams) -> NeuronParams:
        if self.target != NEURON_PARAM:
            raise ValueError(f"{self.name} does not target neuron parameters")
        if self.custom is not None:
            return self.custom(params)
        which, rho = self.args
        new = getattr(params, which) * rho
        if not (math.isfinite(new) and new > 0):
            raise ValueError(f"scaling {which} by {rho} degenerates the neuron")
        return replace(params, **{which: new})

    def apply_weight(self, w: float, quantizer: Quantizer | None = None) -> float:
        if self.target != SYNAPSE_WEIGHT:
            raise ValueError(f"{self.name} does not target synapse weights")
        if self.custom is not None:
            return float(self.custom(w, quantizer))
        if self.name == "dead_synapse":
            return 0.0
        if self.name == "saturated_synapse":
            return float(self.args[0])
        if self.name == "perturbed_synapse":
            return float(self.args[0] * w)
        if self.name == "bitflip_synapse":
            bits, width = self.args
            if quantizer is None:
                raise ValueError("bit-flip faults need a quantizer")
            if quantizer.width != width:
                raise ValueError(
                    f"fault expects {width}-bit codes, quantizer is {quantizer.width}-bit")
            mask = 0
            for b in bits:
                mask |= 1 << b
            return quantizer.dequantize(quantizer.quantize(w) ^ mask)
        raise ValueError(f"no weight behaviour for {self.name!r}")

    def describe(self) -> dict:
        """Config-style description (used by the file formats)."""
        out = {"name": self.name}
        if self.name == "stuck_at":
            out["value"] = self.args[0]
        elif self.name == "param_scale":
            out["param"], out["rho"] = self.args
        elif self.name == "saturated_synapse":
            out["value"] = self.args[0]
        elif self.name == "perturbed_synapse":
            out["rho"] = self.args[0]
        elif self.name == "bitflip_synapse":
            out["bits"], out["width"] = sorted(self.args[0]), self.args[1]
        return out


def dead_neuron() -> FaultModel:
    return FaultModel("dead_neuron", NEURON_OUTPUT)


def saturated_neuron() -> FaultModel:
    return FaultModel("saturated_neuron", NEURON_OUTPUT)


def stuck_at(x: float) -> FaultModel:
    """Output held at x while active; x = 0 and x = 1 reproduce dead/saturated."""
    if not math.isfinite(x):
        raise ValueError(f"stuck-at value must be finite, got {x}")
    return FaultModel("stuck_at", NEURON_OUTPUT, (float(x),))


def param_scale(which: str, rho: float) -> FaultModel:
    if which not in PARAM_NAMES:
        raise ValueError(f"unknown neuron parameter {which!r}")
    if not (math.isfinite(rho) and rho > 0):
        raise ValueError(f"parameter scale must be finite and > 0, got {rho}")
    return FaultModel("param_scale", NEURON_PARAM, (which, float(rho)))


def dead_synapse() -> FaultModel:
    return FaultModel("dead_synapse", SYNAPSE_WEIGHT)


def saturated_synapse(value: float = DEFAULT_SATURATION_VALUE) -> FaultModel:
    if not math.isfinite(value):
        raise ValueError(f"saturation value must be finite, got {value}")
    return FaultModel("saturated_synapse", SYNAPSE_WEIGHT, (float(value),))


def perturbed_synapse(rho: float) -> FaultModel:
    if not math.isfinite(rho):
        raise ValueError(f"perturbation factor must be finite, got {rho}")
    return FaultModel("perturbed_synapse", SYNAPSE_WEIGHT, (float(rho),))


def bitflip_synapse(bits, width: int = 8) -> FaultModel:
    if isinstance(bits, (int, np.integer)):
        bits = (int(bits),)
    bits = frozenset(int(b) for b in bits)
    if not bits:
        raise ValueError("bit-flip fault needs at least one bit position")
    if any(b < 0 or b >= width for b in bits):
        raise ValueError(f"bit positions {sorted(bits)} outside 0..{width - 1}")
    return FaultModel("bitflip_synapse", SYNAPSE_WEIGHT, (bits, int(width)))


_REGISTRY: dict[str, object] = {
    "dead_neuron": lambda cfg: dead_neuron(),
    "saturated_neuron": lambda cfg: saturated_neuron(),
    "stuck_at": lambda cfg: stuck_at(cfg["value"]),
    "param_scale": lambda cfg: param_scale(cfg["param"], cfg["rho"]),
    "dead_synapse": lambda cfg: dead_synapse(),
    "saturated_synapse": lambda cfg: saturated_synapse(
        cfg.get("value", DEFAULT_SATURATION_VALUE)),
    "perturbed_synapse": lambda cfg: perturbed_synapse(cfg["rho"]),
    "bitflip_synapse": lambda cfg: bitflip_synapse(cfg["bits"], cfg.get("width", 8)),
}


def register_fault_model(name: str, factory) -> None:
    """Register a user-defined model for config files: factory(cfg) -> FaultModel."""
    if name in _REGISTRY:
        raise ValueError(f"fault model {name!r} already registered")
    _REGISTRY[name] = factory


def model_from_config(cfg: dict) -> FaultModel:
    name = cfg.get("name")
    if name not in _REGISTRY:
        raise KeyError(f"unknown fault model {name!r}")
    return _REGISTRY[name](cfg)


# ---------------------------------------------------------------------------
# Sites and durations


@dataclass(frozen=True)
class FaultSite:
    """Location of a fault.

    neuron sites    layer + position (channel, y, x) in the layer's output
    synapse sites   layer + index into its weights: (out, in) for dense
                    layers, (out_ch, in_ch, ky, kx) for convolutions
    random sites    position/index left None; layer None means anywhere in
                    the network, a layer reference restricts the draw
    """

    layer: object = None
    position: tuple | None = None
    index: tuple | None = None

    def __post_init__(self):
        if self.position is not None and self.index is not None:
            raise ValueError("a site is either a neuron or a synapse, not both")
        if self.position is not None:
            object.__setattr__(self, "position", tuple(int(v) for v in self.position))
            if len(self.position) != 3:
                raise ValueError(f"neuron position must be (c, y, x), got {self.position}")
        if self.index is not None:
            object.__setattr__(self, "index", tuple(int(v) for v in self.index))
            if len(self.index) not in (2, 4):
                raise ValueError(f"synapse index must have 2 or 4 entries, got {self.index}")

    @property
    def random_pending(self) -> bool:
        return self.position is None and self.index is None

    def describe(self) -> dict:
        out = {}
        if self.layer is not None:
            out["layer"] = self.layer
        if self.position is not None:
            out["neuron"] = list(self.position)
        if self.index is not None:
            out["synapse"] = list(self.index)
        return out


@dataclass(frozen=True)
class FaultDuration:
    """Permanent, or transient over inclusive 1-based ticks [t1, t2]."""

    kind: str = "permanent"
    t1: int = 0
    t2: int = 0

    def __post_init__(self):
        if self.kind not in ("permanent", "transient"):
            raise ValueError(f"unknown duration kind {self.kind!r}")
        if self.kind == "transient" and not 1 <= self.t1 <= self.t2:
            raise ValueError(f"bad transient window [{self.t1}, {self.t2}]")

    @property
    def is_permanent(self) -> bool:
        return self.kind == "permanent"

    def active_mask(self, num_steps: int) -> np.ndarray:
        if self.kind == "transient" and self.t2 > num_steps:
            raise ValueError(
                f"transient window [{self.t1}, {self.t2}] exceeds {num_steps} ticks")
        mask = np.ones(num_steps, dtype=bool)
        if self.kind == "transient":
            mask[:] = False
            mask[self.t1 - 1: self.t2] = True
        return mask

    def describe(self):
        return "permanent" if self.is_permanent else {"transient": [self.t1, self.t2]}


def permanent() -> FaultDuration:
    return FaultDuration("permanent")


def transient(t1: int, t2: int) -> FaultDuration:
    return FaultDuration("transient", int(t1), int(t2))


def is_active(duration: FaultDuration, t: int) -> bool:
    """Is the fault active at 1-based tick t?"""
    if t < 1:
        raise ValueError(f"tick index is 1-based, got {t}")
    return duration.is_permanent or duration.t1 <= t <= duration.t2


@dataclass
class Fault:
    """One fault model applied at one or more sites for a duration."""

    model: FaultModel
    sites: list[FaultSite] = field(default_factory=lambda: [FaultSite()])
    duration: FaultDuration = field(default_factory=permanent)

    def __post_init__(self):
        if isinstance(self.sites, FaultSite):
            self.sites = [self.sites]
        elif isinstance(self.sites, (int, np.integer)):
            # Alg.-style sugar: an int asks for that many network-wide draws.
            self.sites = [FaultSite() for _ in range(int(self.sites))]
        else:
            self.sites = list(self.sites)
        if not self.sites:
            raise ValueError("fault needs at least one site")
        for site in self.sites:
            kind_ok = (site.random_pending
                       or (site.position is not None
                           and self.model.target in (NEURON_OUTPUT, NEURON_PARAM))
                       or (site.index is not None
                           and self.model.target == SYNAPSE_WEIGHT))
            if not kind_ok:
                raise ValueError(
                    f"site {site} incompatible with target {self.model.target}")

    def describe(self) -> dict:
        return {
            "model": self.model.describe(),
            "sites": [s.describe() for s in self.sites],
            "duration": self.duration.describe(),
        }


# ---------------------------------------------------------------------------
# The fault functions as free operations


def faulty_neuron_output(model: FaultModel, nominal: np.ndarray,
                         duration: FaultDuration) -> np.ndarray:
    """Rewrite one neuron's output row; inactive ticks keep nominal values."""
    nominal = np.asarray(nominal, dtype=np.float64)
    active = duration.active_mask(len(nominal))
    return model.apply_output(nominal, active)


def faulty_params(model: FaultModel, params: NeuronParams) -> NeuronParams:
    return model.apply_params(params)


def faulty_weight(model: FaultModel, w: float, quantizer: Quantizer | None,
                  t: int, duration: FaultDuration) -> float:
    """Weight seen at 1-based tick t: nominal outside the active window."""
    if not is_active(duration, t):
        return float(w)
    return model.apply_weight(float(w), quantizer)


# ---------------------------------------------------------------------------
# Site enumeration, validation, random assignment


def neuron_site_candidates(net: Network, layer_idx: int) -> list[FaultSite]:
    layer = net.layers[layer_idx]
    if not layer.is_spiking:
        return []
    c, y, x = layer.output_shape
    return [FaultSite(layer.name, position=(ci, yi, xi))
            for ci in range(c) for yi in range(y) for xi in range(x)]


def synapse_site_candidates(net: Network, layer_idx: int) -> list[FaultSite]:
    layer = net.layers[layer_idx]
    if layer.weights is None:
        return []
    if layer.kind == "dense":
        n_out, n_in = layer.weights.shape
        return [FaultSite(layer.name, index=(o, i))
                for o in range(n_out) for i in range(n_in)]
    oc, ic, kh, kw = layer.weights.shape
    return [FaultSite(layer.name, index=(o, i, ky, kx))
            for o in range(oc) for i in range(ic)
            for ky in range(kh) for kx in range(kw)]


def _check_site(net: Network, model: FaultModel, site: FaultSite):
    """Reason the site is invalid for this model, or None."""
    if site.random_pending:
        return None  # checked after assignment
    try:
        idx = net.layer_index(site.layer)
    except KeyError:
        return f"no such layer: {site.layer!r}"
    layer = net.layers[idx]
    if model.target in (NEURON_OUTPUT, NEURON_PARAM):
        if site.position is None:
            return "neuron fault needs a neuron position"
        if not layer.is_spiking:
            return f"no neurons in pooling layer {layer.name!r}"
        shape = layer.output_shape
        if any(not 0 <= v < s for v, s in zip(site.position, shape)):
            return f"neuron {site.position} outside layer shape {shape}"
        return None
    if site.index is None:
        return "synapse fault needs a synapse index"
    if layer.weights is None:
        return f"layer {layer.name!r} has no synapses"
    if len(site.index) != layer.weights.ndim:
        return (f"synapse index {site.index} has {len(site.index)} entries, "
                f"layer weights are {layer.weights.ndim}-D")
    if any(not 0 <= v < s for v, s in zip(site.index, layer.weights.shape)):
        return f"synapse {site.index} outside weights {layer.weights.shape}"
    return None


def validate_site(net: Network, fault: Fault) -> tuple[str, str | None]:
    """('valid', None), or ('dropped', reason) naming the first bad site."""
    for site in fault.sites:
        reason = _check_site(net, fault.model, site)
        if reason is not None:
            return "dropped", reason
    return "valid", None


def assign_random_sites(net: Network, target: str, scope: object, count: int,
                        rng) -> list[FaultSite]:
    """Draw count distinct valid sites for the target, uniformly.

    scope is None (whole network) or a layer reference.  rng is a seed or
    a numpy Generator; a fixed seed yields a fixed draw.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    if scope is None:
        layer_range = range(net.num_layers)
    else:
        layer_range = [net.layer_index(scope)]
    enumerate_layer = (synapse_site_candidates if target == SYNAPSE_WEIGHT
                       else neuron_site_candidates)
    candidates = [s for idx in layer_range for s in enumerate_layer(net, idx)]
    if count > len(candidates):
        raise ValueError(
            f"requested {count} random sites, only {len(candidates)} candidates")
    picks = rng.choice(len(candidates), size=count, replace=False)
    return [candidates[i] for i in picks]
