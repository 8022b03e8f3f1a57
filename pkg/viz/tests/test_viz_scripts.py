"""End-to-end tests for the plotting scripts.

Fixtures are produced exclusively through the engine's external
interfaces: the files are written by hand in the documented formats and
the `snnfault` CLI is driven over subprocess.  Nothing from the
simulator package is imported.
"""

import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

SCRIPTS = Path(__file__).resolve().parent.parent
FORMAT_VERSION = 1


def run_cli(*argv):
    proc = subprocess.run([sys.executable, "-m", "snnfault.cli", *map(str, argv)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


def run_script(name, *argv):
    proc = subprocess.run([sys.executable, str(SCRIPTS / name), *map(str, argv)],
                          capture_output=True, text=True)
    return proc


def write_model(root):
    """Hand-written network file: dense 10-class head on a 5x2 sensor."""
    W = np.zeros((10, 20), dtype="<f4")
    for c in range(10):
        W[c, 10 + c] = 2.0
        W[(c + 1) % 10, 10 + c] = 1.05
    (root / "net.bin").write_bytes(W.tobytes())
    header = {
        "format_version": FORMAT_VERSION,
        "kind": "network",
        "clock": {"period_ms": 1.0, "num_steps": 20},
        "num_classes": 10,
        "input_shape": [2, 5, 2],
        "weights_file": "net.bin",
        "layers": [{
            "name": "OUT", "kind": "dense", "num_neurons": 10,
            "params": {"tau_s": 1.0, "tau_ref": 0.1, "theta": 1.0, "u_rest": 0.0},
            "weight_offset": 0, "weight_count": 200,
        }],
    }
    (root / "net.json").write_text(json.dumps(header))


def write_dataset(root):
    entries = []
    for c in range(10):
        (root / f"s{c}.txt").write_text(f"500 {c % 2} {c // 2} 1\n")
        entries.append({"events": f"s{c}.txt", "label": c, "format": "text"})
    (root / "data.json").write_text(json.dumps({
        "format_version": FORMAT_VERSION, "kind": "dataset",
        "sensor": [5, 2], "samples": entries,
    }))


def write_campaign(root, name, complete_model):
    (root / name).write_text(json.dumps({
        "format_version": FORMAT_VERSION, "kind": "campaign",
        "model": "net.json", "dataset": "data.json",
        "options": {"save_outputs": False},
        "complete": [{"model": complete_model, "layer": "OUT"}],
    }))


@pytest.fixture(scope="module")
def fixtures(tmp_path_factory):
    """Model, dataset, and results/plotdata files for every plot kind."""
    root = tmp_path_factory.mktemp("vizfix")
    write_model(root)
    write_dataset(root)

    write_campaign(root, "c_synapse.json", {"name": "dead_synapse"})
    run_cli("run", "--config", root / "c_synapse.json",
            "--output", root / "r_synapse.json")

    for model in ("dead_neuron", "saturated_neuron"):
        write_campaign(root, f"c_{model}.json", {"name": model})
        run_cli("run", "--config", root / f"c_{model}.json",
                "--output", root / f"r_{model}.json")

    rho_results = []
    for rho in (0.5, 1.0, 2.0):
        tag = str(rho).replace(".", "_")
        write_campaign(root, f"c_theta_{tag}.json",
                       {"name": "param_scale", "param": "theta", "rho": rho})
        run_cli("run", "--config", root / f"c_theta_{tag}.json",
                "--output", root / f"r_theta_{tag}.json")
        rho_results.append(root / f"r_theta_{tag}.json")

    run_cli("export-plots", "--results", root / "r_synapse.json",
            "--kind", "heat", "--output", root / "pd_heat.json")
    run_cli("export-plots", "--results", root / "r_dead_neuron.json",
            root / "r_saturated_neuron.json",
            "--kind", "bar", "--output", root / "pd_bar.json")
    run_cli("export-plots", "--results", *rho_results,
            "--kind", "param_curve", "--output", root / "pd_curve.json")
    run_cli("export-plots", "--results", root / "r_synapse.json",
            "--kind", "counters", "--output", root / "pd_counters.json")
    return root


def _check(proc, image):
    assert proc.returncode == 0, proc.stderr
    assert os.path.getsize(image) > 0
    return json.loads(proc.stdout.strip().splitlines()[-1])


class TestBar:
    def test_from_plotdata(self, fixtures):
        img = fixtures / "bar.png"
        info = _check(run_script("plot_bar.py", fixtures / "pd_bar.json", "-o", img), img)
        assert info["series"] == 2
        assert info["layers"] == 1

    def test_from_raw_results(self, fixtures):
        img = fixtures / "bar_raw.png"
        proc = run_script("plot_bar.py", fixtures / "r_dead_neuron.json",
                          fixtures / "r_saturated_neuron.json", "-o", img)
        assert _check(proc, img)["series"] == 2


class TestHeat:
    def test_one_cell_per_synapse_round(self, fixtures):
        results = json.loads((fixtures / "r_synapse.json").read_text())
        synapse_rounds = len(results["rounds"])
        img = fixtures / "heat.png"
        info = _check(run_script("plot_heat.py", fixtures / "pd_heat.json",
                                 "-o", img), img)
        assert info["cells"] == synapse_rounds == 200

    def test_reshape(self, fixtures):
        img = fixtures / "heat_rs.png"
        info = _check(run_script("plot_heat.py", fixtures / "pd_heat.json",
                                 "-o", img, "--reshape", "20", "10"), img)
        assert info["grid"] == [20, 10]

    def test_reshape_too_small_fails(self, fixtures):
        proc = run_script("plot_heat.py", fixtures / "pd_heat.json",
                          "-o", fixtures / "x.png", "--reshape", "2", "2")
        assert proc.returncode == 1


class TestParamCurve:
    def test_from_plotdata(self, fixtures):
        img = fixtures / "curve.png"
        info = _check(run_script("plot_param_curve.py", fixtures / "pd_curve.json",
                                 "-o", img, "--param", "theta"), img)
        assert info["points"] == 3

    def test_from_raw_results(self, fixtures):
        img = fixtures / "curve_raw.png"
        inputs = [fixtures / f"r_theta_{t}.json" for t in ("0_5", "1_0", "2_0")]
        info = _check(run_script("plot_param_curve.py", *inputs, "-o", img), img)
        assert info["points"] == 3


class TestCounters:
    def test_from_plotdata(self, fixtures):
        img = fixtures / "cnt.png"
        info = _check(run_script("plot_counters.py", fixtures / "pd_counters.json",
                                 "-o", img), img)
        assert info["rounds"] == 200


class TestKindMismatch:
    def test_wrong_plotdata_kind_rejected(self, fixtures):
        proc = run_script("plot_bar.py", fixtures / "pd_heat.json",
                          "-o", fixtures / "no.png")
        assert proc.returncode == 1
        assert "error" in proc.stderr

    def test_missing_file_rejected(self, fixtures):
        proc = run_script("plot_heat.py", fixtures / "missing.json",
                          "-o", fixtures / "no.png")
        assert proc.returncode == 1


class TestDeterminism:
    def test_same_input_same_image(self, fixtures):
        a, b = fixtures / "det_a.png", fixtures / "det_b.png"
        run_script("plot_heat.py", fixtures / "pd_heat.json", "-o", a)
        run_script("plot_heat.py", fixtures / "pd_heat.json", "-o", b)
        assert a.read_bytes() == b.read_bytes()
