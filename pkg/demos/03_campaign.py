#!/usr/bin/env python3
"""A full injection campaign on a synthetic 10-class task.

Builds a hand-crafted network that classifies perfectly, then runs three
campaigns: a mixed two-round campaign, an exhaustive dead-neuron sweep of
the output layer, and a theta sweep showing parametric degradation.
"""

import numpy as np

from snnfault import (
    Campaign,
    CampaignOptions,
    Clock,
    Fault,
    FaultSite,
    Network,
    NeuronParams,
    Sample,
    dense,
)
from snnfault.faults import dead_neuron, param_scale, perturbed_synapse, saturated_neuron

# one input channel per class; the matching output neuron fires twice,
# its right neighbour once, so the golden accuracy is exactly 1.0
params = NeuronParams(tau_s=1.0, tau_ref=0.1, theta=1.0)
W = np.zeros((10, 10), dtype=np.float32)
for c in range(10):
    W[c, c] = 2.0
    W[(c + 1) % 10, c] = 1.05
net = Network([dense("OUT", (10, 1, 1), 10, W, params)], Clock(1.0, 20), 10)

samples = []
for c in range(10):
    values = np.zeros((10, 20))
    values[c, 0] = 1.0
    samples.append(Sample(values, label=c))

print("== campaign 1: two rounds, mixed faults ==")
cmpn = Campaign(net, CampaignOptions(rng_seed=42))
cmpn.inject(Fault(dead_neuron(), FaultSite("OUT", position=(3, 0, 0))))
cmpn.then_inject(Fault(perturbed_synapse(0.5), FaultSite("OUT")),      # random site in OUT
                 Fault(param_scale("theta", 0.5), 2))                  # 2 random sites
results = cmpn.run(samples)
print(f"golden accuracy: {results.golden_accuracy:.2f}")
for i, rnd in enumerate(results.rounds):
    models = ",".join(f["model"]["name"] for f in rnd.faults)
    print(f"  round {i}: {models:<40} accuracy {rnd.accuracy:.2f}  [{rnd.label}]")
cmpn.eject()

print("\n== campaign 2: exhaustive dead/saturated sweep of the output layer ==")
for model, mk in (("dead", dead_neuron), ("saturated", saturated_neuron)):
    cmpn.eject()
    cmpn.inject_complete(mk(), "OUT")
    results = cmpn.run(samples)
    accs = [r.accuracy for r in results.rounds]
    critical = sum(r.label == "critical" for r in results.rounds)
    print(f"  {model:<10} rounds {len(accs):3d}   accuracy "
          f"min {min(accs):.2f} / mean {np.mean(accs):.2f}   critical {critical}")
print("  (a saturated output neuron always wins the rate race: accuracy 0.10)")

print("\n== campaign 3: theta sweep on one output neuron ==")
for rho in (0.25, 0.5, 1.0, 2.0, 4.0):
    cmpn.eject()
    cmpn.inject(Fault(param_scale("theta", rho), FaultSite("OUT", position=(0, 0, 0))))
    results = cmpn.run(samples)
    rnd = results.rounds[0]
    print(f"  theta x {rho:<5} accuracy {rnd.accuracy:.2f}  [{rnd.label}]")

print("\n== work accounting (late start / early stop) ==")
cmpn.eject()
cmpn.inject(Fault(dead_neuron(), FaultSite("OUT", position=(0, 0, 0))))
results = cmpn.run(samples)
c = results.rounds[0].counters
print(f"  golden layer evals: {results.golden_layer_evals}")
print(f"  round layer evals:  {c['layer_evals']}   late starts: {c['late_start_hits']}"
      f"   early stops: {c['early_stop_hits']}")
print("  (hard output-layer faults rewrite the cached record: zero layer evals)")
