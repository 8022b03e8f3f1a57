"""Shared fixture builders for the test suite."""

import numpy as np

from snnfault.srm import Clock, NeuronParams, Network, conv2d, dense, sumpool


def random_params(rng, period_ms=1.0):
    return NeuronParams(
        tau_s=float(rng.uniform(0.6, 5.0) * period_ms),
        tau_ref=float(rng.uniform(0.6, 5.0) * period_ms),
        theta=float(rng.uniform(0.4, 1.5)),
        u_rest=float(rng.choice([0.0, 0.0, rng.uniform(-0.2, 0.2)])),
    )


def _dense_weights(rng, n_out, n_in):
    w = rng.normal(0.35, 1.0, size=(n_out, n_in)) * (2.2 / np.sqrt(n_in))
    return w.astype(np.float32)


def random_net(rng, max_hidden=2, d=100, period_ms=1.0, num_classes=None,
               allow_conv=True, allow_pool=True):
    """Small random network: optional conv/pool front, dense tail.

    Stays under ~64 neurons per layer so brute-force oracles remain fast.
    """
    clock = Clock(period_ms=period_ms, num_steps=d)
    num_classes = num_classes or int(rng.integers(2, 5))
    layers = []
    shape = (int(rng.integers(1, 3)), 4, 4)
    in_shape = shape
    n_hidden = int(rng.integers(0, max_hidden + 1))
    for i in range(n_hidden):
        kind = rng.choice(["conv", "pool", "dense"])
        if kind == "conv" and allow_conv and shape[1] >= 2 and shape[2] >= 2:
            oc = int(rng.integers(1, 4))
            k = int(rng.integers(2, min(3, shape[1]) + 1))
            pad = int(rng.integers(0, 2))
            wts = rng.normal(0.3, 1.0, size=(oc, shape[0], k, k)) * (
                1.8 / np.sqrt(shape[0] * k * k))
            layer = conv2d(f"C{i}", shape, wts.astype(np.float32),
                           random_params(rng, period_ms), stride=1, padding=pad)
        elif kind == "pool" and allow_pool and shape[1] % 2 == 0 and shape[2] % 2 == 0:
            layer = sumpool(f"P{i}", shape, (2, 2))
        else:
            n_out = int(rng.integers(3, 13))
            layer = dense(f"D{i}", shape, n_out,
                          _dense_weights(rng, n_out, int(np.prod(shape))),
                          random_params(rng, period_ms))
        layers.append(layer)
        shape = layer.output_shape
    layers.append(dense("OUT", shape, num_classes,
                        _dense_weights(rng, num_classes, int(np.prod(shape))),
                        random_params(rng, period_ms)))
    net = Network(layers=layers, clock=clock, num_classes=num_classes)
    return net, in_shape


def random_input(rng, in_shape, d, p=0.2):
    n = int(np.prod(in_shape))
    return (rng.random((n, d)) < p).astype(np.float64)


def random_samples(rng, net, count, p=0.2):
    """Random labelled inputs (labels arbitrary) for campaign-level tests."""
    from snnfault.campaign import Sample

    n = int(np.prod(net.input_shape))
    d = net.clock.num_steps
    return [
        Sample(values=(rng.random((n, d)) < p).astype(np.float64),
               label=int(rng.integers(0, net.num_classes)))
        for _ in range(count)
    ]


def random_fault(rng, net):
    """One random fault: any of the nine models, random site and duration."""
    from snnfault import faults as flt

    d = net.clock.num_steps
    kind = int(rng.integers(0, 9))
    model = [
        flt.dead_neuron,
        flt.saturated_neuron,
        lambda: flt.stuck_at(float(rng.uniform(-0.5, 1.5))),
        lambda: flt.param_scale(str(rng.choice(["tau_s", "tau_ref", "theta"])),
                                float(rng.uniform(0.4, 2.5))),
        flt.dead_synapse,
        lambda: flt.saturated_synapse(float(rng.choice([-10.0, 10.0]))),
        lambda: flt.perturbed_synapse(float(rng.uniform(-1.5, 2.5))),
        lambda: flt.bitflip_synapse(int(rng.integers(0, 8)), 8),
        lambda: flt.stuck_at(0.0),
    ][kind]()

    if bool(rng.integers(0, 2)):
        duration = flt.permanent()
    else:
        t1 = int(rng.integers(1, d + 1))
        t2 = int(rng.integers(t1, d + 1))
        duration = flt.transient(t1, t2)

    scope_kind = rng.choice(["network", "layer", "explicit"])
    if scope_kind == "network":
        site = flt.FaultSite()
    else:
        if model.target == flt.SYNAPSE_WEIGHT:
            layers = [l for l in net.layers if l.weights is not None]
        else:
            layers = [l for l in net.layers if l.is_spiking]
        layer = layers[int(rng.integers(0, len(layers)))]
        if scope_kind == "layer":
            site = flt.FaultSite(layer.name)
        else:
            site = flt.assign_random_sites(net, model.target, layer.name, 1,
                                           int(rng.integers(0, 2 ** 31)))[0]
    return flt.Fault(model, site, duration)


def random_campaign(rng, net, max_rounds=10, options=None):
    """Campaign with 1..max_rounds rounds of 1..3 random faults each."""
    from snnfault.campaign import Campaign, CampaignOptions

    cmpn = Campaign(net, options or CampaignOptions())
    for _ in range(int(rng.integers(1, max_rounds + 1))):
        faults = [random_fault(rng, net) for _ in range(int(rng.integers(1, 4)))]
        cmpn.then_inject(*faults)
    return cmpn


# Fixed-point params: tau_s = T makes eps(T) exactly 1; the tiny tau_ref
# keeps the refractory influence around 2e-4 so spike counts below are
# robust to it.
CRISP = NeuronParams(tau_s=1.0, tau_ref=0.1, theta=1.0, u_rest=0.0)


def ten_class_fixture(d=20):
    """Balanced 10-class task solved exactly by hand-built weights.

    Class-c samples spike input neuron c at tick 1.  Output neuron c then
    fires twice (weight 2.0) and neuron (c+1) % 10 fires exactly once
    (weight 1.05), so golden accuracy is 1.0, every output neuron has a
    nonzero count somewhere, and no count comes near the saturated d.
    """
    from snnfault.campaign import Sample

    W = np.zeros((10, 10), dtype=np.float32)
    for c in range(10):
        W[c, c] = 2.0
        W[(c + 1) % 10, c] = 1.05
    layer = dense("OUT", (10, 1, 1), 10, W, CRISP)
    net = Network([layer], Clock(1.0, d), 10)
    samples = []
    for c in range(10):
        values = np.zeros((10, d))
        values[c, 0] = 1.0
        samples.append(Sample(values, label=c))
    return net, samples


def event_task_fixture(d=20):
    """ten_class_fixture retargeted at event input: sensor 5x2, polarity 1.

    Class c raises one positive event at pixel (y=c//2, x=c%2), which is
    flat input 10 + c of the (2, 5, 2) record; the weight structure then
    mirrors ten_class_fixture (winner fires twice, neighbour once).
    """
    W = np.zeros((10, 20), dtype=np.float32)
    for c in range(10):
        W[c, 10 + c] = 2.0
        W[(c + 1) % 10, 10 + c] = 1.05
    layer = dense("OUT", (2, 5, 2), 10, W, CRISP)
    net = Network([layer], Clock(1.0, d), 10)
    events = [([(500, c % 2, c // 2, 1)], c) for c in range(10)]
    return net, events


def one_spike_hazard_fixture(d=6):
    """Two-layer net where killing one golden spike flips the prediction.

    Neuron A of the hidden layer fires exactly once; a dead fault on it
    yields a 1-norm difference of exactly 1 at that layer, and downstream
    the top-1 prediction flips from class 0 to class 1.
    """
    from snnfault.campaign import Sample

    hidden = dense("H", (1, 1, 1), 2,
                   np.array([[1.05], [1.05]], dtype=np.float32), CRISP)
    out = dense("OUT", (2, 1, 1), 2,
                np.array([[2.0, 0.0], [0.0, 1.05]], dtype=np.float32), CRISP)
    net = Network([hidden, out], Clock(1.0, d), 2)
    values = np.zeros((1, d))
    values[0, 0] = 1.0
    return net, [Sample(values, label=0)]


def relay_chain_fixture(num_layers=5, width=3, d=12):
    """Chain of identical dense relay layers for work-accounting tests."""
    from snnfault.campaign import Sample

    layers = []
    shape = (width, 1, 1)
    for i in range(num_layers):
        name = f"L{i}" if i < num_layers - 1 else "OUT"
        layers.append(dense(name, shape, width,
                            (2.0 * np.eye(width)).astype(np.float32), CRISP))
    net = Network(layers, Clock(1.0, d), width)
    rng = np.random.default_rng(99)
    samples = []
    for _ in range(3):
        values = np.zeros((width, d))
        values[rng.integers(0, width), 0] = 1.0
        values[rng.integers(0, width), d // 2] = 1.0
        samples.append(Sample(values, label=0))
    return net, samples
