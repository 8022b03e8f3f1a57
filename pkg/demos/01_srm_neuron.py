#!/usr/bin/env python3
"""A single spike-response neuron on the grid.

Walks through the two kernels, then drives one neuron with a short input
train and prints its membrane trace and output spikes as ASCII.
"""

import numpy as np

from snnfault import Clock, NeuronParams, SpikeRecord, dense, eval_kernel
from snnfault.srm import simulate_layer_neurons

clock = Clock(period_ms=1.0, num_steps=40)
params = NeuronParams(tau_s=3.0, tau_ref=4.0, theta=1.0, u_rest=0.0)

print("== kernels ==")
print("synaptic response peaks at lag tau_s:")
for lag in (1.0, 3.0, 6.0, 12.0):
    print(f"  eps({lag:4.1f} ms) = {eval_kernel('synaptic', lag, params):+.4f}")
print("refractory response is negative and scales with theta:")
for lag in (1.0, 4.0, 8.0, 16.0):
    print(f"  eta({lag:4.1f} ms) = {eval_kernel('refractory', lag, params):+.4f}")

print("\n== one neuron, three input spikes through weight 1.4 ==")
inputs = np.zeros((1, clock.num_steps))
inputs[0, [2, 5, 20]] = 1.0
layer = dense("N", (1, 1, 1), 1, np.array([[1.4]], dtype=np.float32), params)
record, trace = simulate_layer_neurons(layer, SpikeRecord("in", inputs), clock)

scale = trace.max() or 1.0
print("tick  u(t)      membrane                     in out")
for j in range(clock.num_steps):
    bar = "#" * max(0, int(20 * trace[0, j] / scale))
    marks = ("I" if inputs[0, j] else ".") + "  " + ("S" if record.values[0, j] else ".")
    print(f"{j + 1:4d}  {trace[0, j]:+.3f}  {bar:<28} {marks}")

print(f"\ntotal output spikes: {int(record.values.sum())}")
print("note the refractory dip right after each output spike")
