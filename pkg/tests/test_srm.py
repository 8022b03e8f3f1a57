"""Unit and property tests for the SRM simulation core."""

import math

import numpy as np
import pytest

from snnfault.srm import (
    Clock,
    NeuronParams,
    SpikeRecord,
    Network,
    dense,
    sumpool,
    eval_kernel,
    kernel_on_grid,
    simulate_layer_neurons,
    sumpool_forward,
    network_forward,
)

from oracles import direct_network, direct_spiking_layer, dense_equivalent, grid_kernel
from support import random_net, random_input

PARAMS = NeuronParams(tau_s=2.0, tau_ref=2.0, theta=1.0, u_rest=0.0)


class TestEvalKernel:
    def test_synaptic_peak_at_tau(self):
        assert eval_kernel("synaptic", PARAMS.tau_s, PARAMS) == pytest.approx(1.0, abs=1e-15)

    def test_negative_lag_is_zero(self):
        assert eval_kernel("synaptic", -1.0, PARAMS) == 0.0
        assert eval_kernel("refractory", -0.5, PARAMS) == 0.0

    def test_zero_lag_is_zero(self):
        assert eval_kernel("synaptic", 0.0, PARAMS) == 0.0

    def test_synaptic_at_twice_tau(self):
        # 2*e^-1, frozen from the closed form evaluated at s = 2*tau_s
        assert eval_kernel("synaptic", 2 * PARAMS.tau_s, PARAMS) == pytest.approx(
            2 * math.exp(-1), abs=1e-12)

    def test_refractory_trough(self):
        assert eval_kernel("refractory", PARAMS.tau_ref, PARAMS) == pytest.approx(-2.0, abs=1e-15)

    def test_nonfinite_lag_rejected(self):
        for bad in (math.nan, math.inf, -math.inf):
            with pytest.raises(ValueError):
                eval_kernel("synaptic", bad, PARAMS)

    def test_sign_properties(self):
        rng = np.random.default_rng(7)
        for lag in rng.uniform(1e-6, 50.0, size=200):
            assert eval_kernel("synaptic", lag, PARAMS) > 0
            assert eval_kernel("refractory", lag, PARAMS) < 0

    def test_grid_kernel_matches_pointwise_eval(self):
        clock = Clock(1.0, 50)
        eps = kernel_on_grid("synaptic", PARAMS, clock)
        for k, v in enumerate(eps):
            assert v == pytest.approx(eval_kernel("synaptic", k * clock.period_ms, PARAMS))

    def test_grid_kernel_truncates_tail(self):
        clock = Clock(1.0, 400)
        eps = kernel_on_grid("synaptic", NeuronParams(1.0, 1.0, 1.0), clock)
        assert len(eps) < 400
        assert abs(eps[-1]) >= 1e-6  # everything kept is above the cutoff


def _single_spike_record(n, d, row, step):
    values = np.zeros((n, d))
    values[row, step] = 1.0
    return SpikeRecord("in", values, (n, 1, 1))


class TestSimulateLayer:
    def setup_method(self):
        self.clock = Clock(1.0, 60)

    def _one_neuron_layer(self, w):
        return dense("L", (1, 1, 1), 1, np.array([[w]], dtype=np.float32), PARAMS)

    def test_all_zero_input(self):
        layer = self._one_neuron_layer(3.0)
        rec, trace = simulate_layer_neurons(layer, _single_spike_record(1, 60, 0, 0) .copy(), self.clock)
        rec_zero, trace_zero = simulate_layer_neurons(
            layer, SpikeRecord("in", np.zeros((1, 60))), self.clock)
        assert not rec_zero.values.any()
        assert np.all(trace_zero == PARAMS.u_rest)
        assert rec.values.any()  # sanity: the spiking variant is not trivially zero

    def test_strong_single_spike_fires_once_then_suppressed(self):
        # Brute-force oracle pins both the first-crossing step and the count.
        w = 2.5
        layer = self._one_neuron_layer(w)
        rec, trace = simulate_layer_neurons(layer, _single_spike_record(1, 60, 0, 0), self.clock)
        out_ref, trace_ref = direct_spiking_layer(
            np.array([[w]]), _single_spike_record(1, 60, 0, 0).values, PARAMS, self.clock)
        assert np.array_equal(rec.values, out_ref)
        np.testing.assert_allclose(trace, trace_ref, atol=1e-9)
        # first crossing is the first grid point with w*eps >= theta
        firing = np.nonzero(rec.values[0])[0]
        first_expected = next(
            j for j in range(60)
            if w * eval_kernel("synaptic", (j - 0) * 1.0, PARAMS) >= PARAMS.theta)
        assert firing[0] == first_expected

    def test_weak_single_spike_never_fires(self):
        w = 0.9  # peak drive w*1.0 < theta
        layer = self._one_neuron_layer(w)
        inp = _single_spike_record(1, 60, 0, 3)
        rec, trace = simulate_layer_neurons(layer, inp, self.clock)
        assert not rec.values.any()
        eps = grid_kernel(PARAMS.tau_s, 60, 1.0)  # truncated-tail grid kernel
        expected = PARAMS.u_rest + np.array(
            [w * (eps[j - 3] if j >= 3 else 0.0) for j in range(60)])
        np.testing.assert_allclose(trace[0], expected, atol=1e-9)

    def test_shape_mismatch_rejected(self):
        layer = self._one_neuron_layer(1.0)
        with pytest.raises(ValueError):
            simulate_layer_neurons(layer, SpikeRecord("in", np.zeros((2, 60))), self.clock)
        with pytest.raises(ValueError):
            simulate_layer_neurons(layer, SpikeRecord("in", np.zeros((1, 59))), self.clock)

    def test_nonfinite_drive_rejected(self):
        layer = self._one_neuron_layer(2.5)
        values = np.full((1, 60), 1e308)  # kernel sums overflow float64
        with np.errstate(over="ignore"), pytest.raises(FloatingPointError):
            simulate_layer_neurons(layer, SpikeRecord("in", values), self.clock)

    def test_graded_input_scales_linearly(self):
        layer = self._one_neuron_layer(0.4)
        single = SpikeRecord("in", np.zeros((1, 60)))
        single.values[0, 0] = 3.0  # three simultaneous unit spikes
        triple = np.zeros((3, 60))
        triple[:, 0] = 1.0
        layer3 = dense("L3", (3, 1, 1), 1,
                       np.array([[0.4, 0.4, 0.4]], dtype=np.float32), PARAMS)
        rec_a, tr_a = simulate_layer_neurons(layer, single, self.clock)
        rec_b, tr_b = simulate_layer_neurons(layer3, SpikeRecord("in", triple), self.clock)
        np.testing.assert_allclose(tr_a, tr_b, atol=1e-12)
        assert np.array_equal(rec_a.values, rec_b.values)


class TestSumpool:
    def test_window_sum(self):
        layer = sumpool("P", (1, 2, 2), (2, 2))
        values = np.zeros((4, 10))
        values[:, 5] = 1.0
        out = sumpool_forward(layer, SpikeRecord("in", values, (1, 2, 2)))
        assert out.values.shape == (1, 10)
        assert out.values[0, 5] == 4.0
        assert out.values[0, :5].sum() == 0.0

    def test_single_spike_in_window(self):
        layer = sumpool("P", (1, 2, 2), (2, 2))
        values = np.zeros((4, 10))
        values[2, 3] = 1.0
        out = sumpool_forward(layer, SpikeRecord("in", values, (1, 2, 2)))
        assert out.values[0, 3] == 1.0
        assert out.values.sum() == 1.0

    def test_all_zero(self):
        layer = sumpool("P", (2, 4, 4), (2, 2))
        out = sumpool_forward(layer, SpikeRecord("in", np.zeros((32, 7)), (2, 4, 4)))
        assert not out.values.any()

    def test_indivisible_dims_rejected(self):
        with pytest.raises(ValueError):
            sumpool("P", (1, 3, 4), (2, 2))

    def test_matches_enumerated_matrix(self):
        rng = np.random.default_rng(3)
        layer = sumpool("P", (2, 4, 6), (2, 3))
        values = (rng.random((48, 12)) < 0.4).astype(float)
        out = sumpool_forward(layer, SpikeRecord("in", values, (2, 4, 6)))
        ref = dense_equivalent(layer) @ values
        assert np.array_equal(out.values, ref)


class TestNetworkForward:
    def test_zero_weights_all_zero(self):
        clock = Clock(1.0, 20)
        l1 = dense("A", (2, 1, 1), 3, np.zeros((3, 2), dtype=np.float32), PARAMS)
        l2 = dense("B", (3, 1, 1), 2, np.zeros((2, 3), dtype=np.float32), PARAMS)
        net = Network([l1, l2], clock, 2)
        rng = np.random.default_rng(0)
        inp = SpikeRecord("in", (rng.random((2, 20)) < 0.5).astype(float))
        records = network_forward(net, inp)
        assert all(not r.values.any() for r in records)

    def test_late_start_reproduces_full_run(self):
        rng = np.random.default_rng(11)
        net, in_shape = random_net(rng, d=50)
        inp = SpikeRecord("in", random_input(rng, in_shape, 50), None, )
        full = network_forward(net, inp)
        last = network_forward(net, inp, start_layer=net.num_layers - 1,
                               seed_record=full[-2] if net.num_layers > 1 else inp)
        assert np.array_equal(last[-1].values, full[-1].values)

    def test_missing_seed_rejected(self):
        rng = np.random.default_rng(1)
        net, in_shape = random_net(rng, d=30)
        inp = SpikeRecord("in", random_input(rng, in_shape, 30))
        if net.num_layers > 1:
            with pytest.raises(ValueError):
                network_forward(net, inp, start_layer=1)

    def test_chained_runs_bit_identical(self):
        rng = np.random.default_rng(23)
        for _ in range(5):
            net, in_shape = random_net(rng, d=40)
            inp = SpikeRecord("in", random_input(rng, in_shape, 40))
            full = network_forward(net, inp)
            chained = []
            prev = inp
            for idx in range(net.num_layers):
                out = network_forward(net, inp, start_layer=idx,
                                      seed_record=None if idx == 0 else prev,
                                      stop_layer=idx)[0]
                chained.append(out)
                prev = out
            for a, b in zip(full, chained):
                assert np.array_equal(a.values, b.values)


class TestProperties:
    def test_oracle_equivalence_small(self):
        rng = np.random.default_rng(42)
        for _ in range(8):
            net, in_shape = random_net(rng, d=80)
            values = random_input(rng, in_shape, 80)
            records = network_forward(net, SpikeRecord("in", values))
            ref_records, _ = direct_network(net, values)
            for rec, ref in zip(records, ref_records):
                assert np.array_equal(rec.values, ref), "spike mismatch vs oracle"

    def test_causality(self):
        rng = np.random.default_rng(5)
        net, in_shape = random_net(rng, d=60)
        base = random_input(rng, in_shape, 60)
        cut = 30
        tampered = base.copy()
        tampered[:, cut:] = (rng.random(tampered[:, cut:].shape) < 0.5).astype(float)
        out_a = network_forward(net, SpikeRecord("in", base))
        out_b = network_forward(net, SpikeRecord("in", tampered))
        for a, b in zip(out_a, out_b):
            assert np.array_equal(a.values[:, :cut], b.values[:, :cut])

    def test_threshold_monotonicity(self):
        rng = np.random.default_rng(9)
        clock = Clock(1.0, 120)
        for _ in range(20):
            w = float(rng.uniform(0.5, 3.0))
            values = (rng.random((1, 120)) < 0.3).astype(float)
            thetas = sorted(rng.uniform(0.2, 3.0, size=4))
            counts = []
            for theta in thetas:
                p = NeuronParams(tau_s=2.0, tau_ref=2.0, theta=float(theta))
                layer = dense("L", (1, 1, 1), 1, np.array([[w]], dtype=np.float32), p)
                rec, _ = simulate_layer_neurons(layer, SpikeRecord("in", values), clock)
                counts.append(rec.values.sum())
            assert all(a >= b for a, b in zip(counts, counts[1:]))

    def test_determinism(self):
        rng = np.random.default_rng(13)
        net, in_shape = random_net(rng, d=50)
        values = random_input(rng, in_shape, 50)
        a = network_forward(net, SpikeRecord("in", values))
        b = network_forward(net, SpikeRecord("in", values.copy()))
        for ra, rb in zip(a, b):
            assert np.array_equal(ra.values, rb.values)

    def test_unfaulted_outputs_binary(self):
        rng = np.random.default_rng(17)
        net, in_shape = random_net(rng, d=40)
        records = network_forward(net, SpikeRecord("in", random_input(rng, in_shape, 40)))
        for rec, layer in zip(records, net.layers):
            assert (rec.values >= 0).all()
            if layer.is_spiking:
                assert set(np.unique(rec.values)) <= {0.0, 1.0}
