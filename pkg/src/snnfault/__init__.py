"""Spiking-network simulator with a hardware fault-injection campaign engine."""

from snnfault.srm import (
    Clock,
    NeuronParams,
    SpikeRecord,
    LayerSpec,
    Network,
    eval_kernel,
    simulate_layer_neurons,
    sumpool_forward,
    network_forward,
    dense,
    conv2d,
    sumpool,
)
from snnfault.faults import (
    Fault,
    FaultSite,
    FaultDuration,
    FaultModel,
    Quantizer,
    dead_neuron,
    saturated_neuron,
    stuck_at,
    param_scale,
    dead_synapse,
    saturated_synapse,
    perturbed_synapse,
    bitflip_synapse,
    permanent,
    transient,
)
from snnfault.campaign import (
    Campaign,
    CampaignOptions,
    CampaignResults,
    Sample,
    decode_rate,
    golden_run,
)

__version__ = "0.1.0"
