"""Command-line front end.

Subcommands:
    golden        nominal accuracy of a model over a dataset
    run           execute a campaign config, write a results file
    complete      generate an exhaustive per-element campaign config
    export-plots  flatten results files for the plotting scripts
    validate      dry-run the preparation stage of a config

Exit codes: 0 success, 2 success with dropped-fault warnings, 1 error.
"""

from __future__ import annotations

import argparse
import json
import sys

from snnfault import formats
from snnfault.campaign import Campaign, golden_run


def _add_option_overrides(p):
    p.add_argument("--late-start", dest="late_start", action="store_true", default=None)
    p.add_argument("--no-late-start", dest="late_start", action="store_false")
    p.add_argument("--early-stop", dest="early_stop", action="store_true", default=None)
    p.add_argument("--no-early-stop", dest="early_stop", action="store_false")
    p.add_argument("--tolerance", type=float, default=None,
                   help="early-stop tolerance (use with caution when > 0)")
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--parallel", action="store_true", default=None)
    p.add_argument("--save-outputs", action="store_true", default=None)
    p.add_argument("--misprediction-tolerance", type=float, default=None)
    p.add_argument("--seed", type=int, default=None, help="campaign RNG seed")


def _apply_overrides(options, args):
    pairs = [("late_start", args.late_start), ("early_stop", args.early_stop),
             ("early_stop_tolerance", args.tolerance), ("batch_size", args.batch_size),
             ("parallel", args.parallel), ("save_outputs", args.save_outputs),
             ("misprediction_tolerance", args.misprediction_tolerance),
             ("rng_seed", args.seed)]
    for name, value in pairs:
        if value is not None:
            setattr(options, name, value)
    options.__post_init__()
    return options


def _parse_fault_spec(spec: str) -> dict:
    """e.g. 'bitflip_synapse:7', 'param_scale:theta:0.5', 'stuck_at:0.5'."""
    parts = spec.split(":")
    name, args = parts[0], parts[1:]
    cfg = {"name": name}
    try:
        if name == "stuck_at":
            cfg["value"] = float(args[0])
        elif name == "param_scale":
            cfg["param"] = args[0]
            cfg["rho"] = float(args[1])
        elif name == "saturated_synapse" and args:
            cfg["value"] = float(args[0])
        elif name == "perturbed_synapse":
            cfg["rho"] = float(args[0])
        elif name == "bitflip_synapse":
            cfg["bits"] = [int(b) for b in args[0].split(",")]
            if len(args) > 1:
                cfg["width"] = int(args[1])
    except (IndexError, ValueError) as exc:
        raise SystemExit(f"error: bad fault spec {spec!r}: {exc}")
    return cfg


def cmd_golden(args) -> int:
    net = formats.load_network(args.model)
    samples, _ = formats.load_dataset(args.dataset, net.clock)
    if not samples:
        print("error: dataset is empty", file=sys.stderr)
        return 1
    cache = golden_run(net, samples)
    accuracy = cache.num_correct / len(samples)
    print(f"golden accuracy: {accuracy:.4f} ({cache.num_correct}/{len(samples)})")
    if args.output:
        results = Campaign(net).run(samples)
        formats.export_results(results, args.output)
        print(f"wrote {args.output}")
    return 0


def cmd_run(args) -> int:
    parsed = formats.parse_campaign(args.config)
    dataset_path = args.dataset or parsed.dataset_path
    if dataset_path is None:
        print("error: no dataset in config and none given", file=sys.stderr)
        return 1
    samples, _ = formats.load_dataset(dataset_path, parsed.net.clock)
    _apply_overrides(parsed.campaign.options, args)
    results = parsed.campaign.run(samples)
    formats.export_results(results, args.output)
    dropped = [w for w in results.warnings if "dropped" in w]
    for w in results.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"golden accuracy: {results.golden_accuracy:.4f}")
    print(f"rounds: {len(results.rounds)} "
          f"(critical: {sum(r.label == 'critical' for r in results.rounds)})")
    print(f"runtime: {results.runtime_s:.2f}s; wrote {args.output}")
    return 2 if dropped else 0


def cmd_complete(args) -> int:
    # the model file is opened only to fail fast on a bad reference
    formats.load_network(args.model)
    formats.save_campaign_config(
        args.output,
        model_file=args.model_ref or args.model,
        dataset_file=args.dataset,
        complete=[{"model": _parse_fault_spec(args.fault), "layer": args.layer}],
    )
    print(f"wrote {args.output}")
    return 0


def cmd_export_plots(args) -> int:
    doc = formats.export_plot_data(args.results, args.kind, args.output,
                                   layer=args.layer)
    print(f"wrote {args.output} ({len(doc['entries'])} entries)")
    return 0


def cmd_validate(args) -> int:
    parsed = formats.parse_campaign(args.config)
    warnings = parsed.campaign.prepare()
    prepared = parsed.campaign._prepared
    summary = {
        "rounds_declared": len(parsed.campaign.rounds),
        "rounds_prepared": len(prepared),
        "rounds": [
            {"faults": [f.describe() for f in rnd.faults],
             "l_left": rnd.l_left, "l_right": rnd.l_right,
             "hard_neuron_only_leftmost": rnd.hard_neuron_only_leftmost}
            for rnd in prepared
        ],
    }
    print(json.dumps(summary, indent=1))
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 2 if any("dropped" in w for w in warnings) else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snnfault",
        description="Spiking-network fault-injection campaigns")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("golden", help="nominal accuracy over a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--output", help="optionally write a zero-round results file")
    p.set_defaults(fn=cmd_golden)

    p = sub.add_parser("run", help="run a campaign config")
    p.add_argument("--config", required=True)
    p.add_argument("--output", required=True, help="results file to write")
    p.add_argument("--dataset", help="override the config's dataset")
    _add_option_overrides(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("complete",
                       help="write a config with one round per element of a layer")
    p.add_argument("--model", required=True)
    p.add_argument("--layer", required=True)
    p.add_argument("--fault", required=True,
                   help="fault spec, e.g. dead_neuron or bitflip_synapse:7")
    p.add_argument("--output", required=True)
    p.add_argument("--dataset", help="dataset reference stored in the config")
    p.add_argument("--model-ref",
                   help="model path to store in the config (default: --model)")
    p.set_defaults(fn=cmd_complete)

    p = sub.add_parser("export-plots", help="flatten results for plotting")
    p.add_argument("--results", required=True, nargs="+")
    p.add_argument("--kind", required=True,
                   choices=["bar", "heat", "param_curve", "counters"])
    p.add_argument("--output", required=True)
    p.add_argument("--layer", help="restrict heat maps to one layer")
    p.set_defaults(fn=cmd_export_plots)

    p = sub.add_parser("validate", help="dry-run the preparation stage")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except formats.FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
