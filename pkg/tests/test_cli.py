"""End-to-end CLI tests (invoked in-process through main())."""

import json

import numpy as np
import pytest

from snnfault.cli import main
from snnfault.formats import (
    load_plot_data,
    load_results,
    save_campaign_config,
    save_dataset,
    save_events,
    save_network,
)

from support import event_task_fixture


@pytest.fixture
def workdir(tmp_path):
    """Model + dataset + a small campaign config on disk."""
    net, event_samples = event_task_fixture()
    save_network(net, tmp_path / "net.json")
    entries = []
    for i, (events, label) in enumerate(event_samples):
        save_events(events, tmp_path / f"s{i}.txt")
        entries.append((f"s{i}.txt", label, "text"))
    save_dataset(tmp_path / "data.json", (5, 2), entries)
    save_campaign_config(
        tmp_path / "cmpn.json", "net.json", "data.json",
        rounds=[[{"model": {"name": "saturated_neuron"},
                  "sites": [{"layer": "OUT", "neuron": [2, 0, 0]}]}]])
    return tmp_path


class TestGolden:
    def test_reports_accuracy(self, workdir, capsys):
        code = main(["golden", "--model", str(workdir / "net.json"),
                     "--dataset", str(workdir / "data.json")])
        out = capsys.readouterr().out
        assert code == 0
        assert "golden accuracy" in out

    def test_missing_model_fails(self, workdir, capsys):
        code = main(["golden", "--model", str(workdir / "nope.json"),
                     "--dataset", str(workdir / "data.json")])
        assert code == 1
        assert "error" in capsys.readouterr().err


class TestRun:
    def test_run_writes_results(self, workdir, capsys):
        out_path = workdir / "res.json"
        code = main(["run", "--config", str(workdir / "cmpn.json"),
                     "--output", str(out_path)])
        assert code == 0
        results = load_results(out_path)
        assert len(results.rounds) == 1
        assert results.rounds[0].label == "critical"

    def test_option_overrides(self, workdir):
        out_path = workdir / "res.json"
        code = main(["run", "--config", str(workdir / "cmpn.json"),
                     "--output", str(out_path), "--no-late-start",
                     "--no-early-stop", "--batch-size", "2", "--seed", "5"])
        assert code == 0
        results = load_results(out_path)
        assert results.options["late_start"] is False
        assert results.options["early_stop"] is False
        assert results.options["batch_size"] == 2
        assert results.options["rng_seed"] == 5

    def test_dropped_fault_exits_2(self, workdir, capsys):
        save_campaign_config(
            workdir / "bad.json", "net.json", "data.json",
            rounds=[[{"model": {"name": "dead_neuron"},
                      "sites": [{"layer": "GHOST", "neuron": [0, 0, 0]}]}],
                    [{"model": {"name": "dead_neuron"},
                      "sites": [{"layer": "OUT", "neuron": [0, 0, 0]}]}]])
        code = main(["run", "--config", str(workdir / "bad.json"),
                     "--output", str(workdir / "res.json")])
        assert code == 2
        assert "dropped" in capsys.readouterr().err

    def test_malformed_config_exits_1(self, workdir, capsys):
        (workdir / "broken.json").write_text("{not json")
        code = main(["run", "--config", str(workdir / "broken.json"),
                     "--output", str(workdir / "res.json")])
        assert code == 1


class TestComplete:
    def test_generates_config_with_element_rounds(self, workdir, capsys):
        code = main(["complete", "--model", str(workdir / "net.json"),
                     "--layer", "OUT", "--fault", "bitflip_synapse:7",
                     "--dataset", "data.json",
                     "--model-ref", "net.json",
                     "--output", str(workdir / "complete.json")])
        assert code == 0
        from snnfault.formats import parse_campaign
        parsed = parse_campaign(workdir / "complete.json")
        assert len(parsed.campaign.rounds) == 200

    def test_then_runnable(self, workdir):
        main(["complete", "--model", str(workdir / "net.json"),
              "--layer", "OUT", "--fault", "dead_neuron",
              "--dataset", "data.json", "--model-ref", "net.json",
              "--output", str(workdir / "complete.json")])
        code = main(["run", "--config", str(workdir / "complete.json"),
                     "--output", str(workdir / "res.json")])
        assert code == 0
        assert len(load_results(workdir / "res.json").rounds) == 10


class TestExportPlots:
    def test_heat_export(self, workdir):
        main(["complete", "--model", str(workdir / "net.json"),
              "--layer", "OUT", "--fault", "dead_synapse",
              "--dataset", "data.json", "--model-ref", "net.json",
              "--output", str(workdir / "complete.json")])
        main(["run", "--config", str(workdir / "complete.json"),
              "--output", str(workdir / "res.json")])
        code = main(["export-plots", "--results", str(workdir / "res.json"),
                     "--kind", "heat", "--output", str(workdir / "heat.json")])
        assert code == 0
        doc = load_plot_data(workdir / "heat.json")
        assert doc["plot_kind"] == "heat"
        assert len(doc["entries"]) == 200


class TestValidate:
    def test_clean_config_exits_0(self, workdir, capsys):
        code = main(["validate", "--config", str(workdir / "cmpn.json")])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["rounds_prepared"] == 1
        assert summary["rounds"][0]["l_left"] == 0

    def test_drops_exit_2(self, workdir, capsys):
        save_campaign_config(
            workdir / "bad.json", "net.json", "data.json",
            rounds=[[{"model": {"name": "dead_neuron"},
                      "sites": [{"layer": "GHOST", "neuron": [0, 0, 0]}]}]])
        code = main(["validate", "--config", str(workdir / "bad.json")])
        assert code == 2
