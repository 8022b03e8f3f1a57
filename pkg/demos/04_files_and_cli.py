#!/usr/bin/env python3
"""File formats and the command line, end to end.

Writes a model file (JSON header + float32 blob), an event-file dataset,
and a campaign config, then drives the CLI: validate, run, golden, and
export-plots.  Everything lands in ./demo_out/.
"""

import os

import numpy as np

from snnfault import Clock, Network, NeuronParams, dense
from snnfault.cli import main
from snnfault.formats import (
    load_results,
    save_campaign_config,
    save_dataset,
    save_events,
    save_network,
)

out = "demo_out"
os.makedirs(out, exist_ok=True)

# model whose input is a 5x2 polarity-event sensor (2 x 5 x 2 = 20 inputs);
# pixel (y, x) of polarity 1 drives class 2*y + x
params = NeuronParams(tau_s=1.0, tau_ref=0.1, theta=1.0)
W = np.zeros((10, 20), dtype=np.float32)
for c in range(10):
    W[c, 10 + c] = 2.0
    W[(c + 1) % 10, 10 + c] = 1.05
net = Network([dense("OUT", (2, 5, 2), 10, W, params)], Clock(1.0, 20), 10)
save_network(net, f"{out}/net.json")
print(f"wrote {out}/net.json + {out}/net.bin")

entries = []
for c in range(10):
    save_events([(500, c % 2, c // 2, 1)], f"{out}/sample{c}.txt")
    entries.append((f"sample{c}.txt", c, "text"))
save_dataset(f"{out}/data.json", (5, 2), entries)
print(f"wrote {out}/data.json and 10 event files")

save_campaign_config(
    f"{out}/cmpn.json", "net.json", "data.json",
    rounds=[
        [{"model": {"name": "saturated_neuron"},
          "sites": [{"layer": "OUT", "neuron": [2, 0, 0]}]}],
        [{"model": {"name": "dead_neuron"},
          "random": {"scope": "OUT", "count": 2, "seed": 7}}],
    ])
print(f"wrote {out}/cmpn.json")

print("\n$ snnfault validate --config cmpn.json")
main(["validate", "--config", f"{out}/cmpn.json"])

print("\n$ snnfault golden --model net.json --dataset data.json")
main(["golden", "--model", f"{out}/net.json", "--dataset", f"{out}/data.json"])

print("\n$ snnfault run --config cmpn.json --output results.json")
main(["run", "--config", f"{out}/cmpn.json", "--output", f"{out}/results.json"])

print("\n$ snnfault complete --fault dead_synapse --layer OUT ... ; run")
main(["complete", "--model", f"{out}/net.json", "--layer", "OUT",
      "--fault", "dead_synapse", "--dataset", "data.json",
      "--model-ref", "net.json", "--output", f"{out}/sweep.json"])
main(["run", "--config", f"{out}/sweep.json", "--output", f"{out}/sweep_results.json"])

print("\n$ snnfault export-plots --kind heat ...")
main(["export-plots", "--results", f"{out}/sweep_results.json",
      "--kind", "heat", "--output", f"{out}/heat.json"])

results = load_results(f"{out}/sweep_results.json")
print(f"\nreloaded results: {len(results.rounds)} rounds, "
      f"golden accuracy {results.golden_accuracy:.2f}")
print(f"see {out}/heat.json for the flattened per-synapse accuracies")
