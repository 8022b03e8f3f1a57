#!/usr/bin/env python3
"""Tour of the nine built-in fault models.

Applies each model to a tiny layer (or a single weight) and prints the
nominal-vs-faulty effect, including a transient window and a quantized
bit-flip sweep.
"""

import numpy as np

from snnfault.faults import (
    Quantizer,
    bitflip_synapse,
    dead_neuron,
    dead_synapse,
    faulty_neuron_output,
    faulty_params,
    faulty_weight,
    param_scale,
    permanent,
    perturbed_synapse,
    saturated_neuron,
    saturated_synapse,
    stuck_at,
    transient,
)
from snnfault import NeuronParams

nominal = np.array([0, 1, 0, 0, 1, 0, 1, 0, 0, 0], dtype=float)


def show_row(label, row):
    print(f"  {label:<28} {' '.join(f'{v:g}' for v in row)}")


print("== neuron output faults (nominal spike row, 10 ticks) ==")
show_row("nominal", nominal)
show_row("dead (permanent)", faulty_neuron_output(dead_neuron(), nominal, permanent()))
show_row("saturated (ticks 4..7)",
         faulty_neuron_output(saturated_neuron(), nominal, transient(4, 7)))
show_row("stuck at 0.5 (permanent)",
         faulty_neuron_output(stuck_at(0.5), nominal, permanent()))

print("\n== neuron parameter faults ==")
params = NeuronParams(tau_s=4.0, tau_ref=3.0, theta=1.0)
for which, rho in (("tau_s", 2.0), ("tau_ref", 0.5), ("theta", 0.5)):
    faulted = faulty_params(param_scale(which, rho), params)
    print(f"  {which} x {rho}: {getattr(params, which)} -> {getattr(faulted, which)}"
          f"   (others untouched)")

print("\n== synapse weight faults (w = 0.37) ==")
w = 0.37
print(f"  dead:              {faulty_weight(dead_synapse(), w, None, 1, permanent())}")
print(f"  saturated (+10):   {faulty_weight(saturated_synapse(10), w, None, 1, permanent())}")
print(f"  saturated (-10):   {faulty_weight(saturated_synapse(-10), w, None, 1, permanent())}")
print(f"  perturbed (x1.5):  {faulty_weight(perturbed_synapse(1.5), w, None, 1, permanent())}")

print("\n== bit flips through an 8-bit affine quantizer over [-1, 1] ==")
q = Quantizer(8, -1.0, 1.0)
code = q.quantize(w)
print(f"  w = {w} quantizes to code {code} (step {q.step:.6f})")
for b in range(8):
    what = faulty_weight(bitflip_synapse(b, 8), w, q, 1, permanent())
    print(f"  flip bit {b}: w -> {what:+.6f}   |dw| = {abs(what - w):.6f}")
print("  severity grows with the bit position; flipping twice restores the code")

print("\n== transient weight fault: active window [3, 5] of 8 ticks ==")
f = perturbed_synapse(3.0)
series = [faulty_weight(f, w, None, t, transient(3, 5)) for t in range(1, 9)]
show_row("w(t)", np.array(series))
