"""Command-line entry point: ``python -m qlayout <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .bench import bench, write_report
from .config import load_config
from .detailed import detailed_place
from .errors import LayoutError
from .fileio import load_netlist, load_placement, save_netlist, save_placement
from .gp import sample_programs, synthetic_gp
from .layout import validate
from .metrics import metrics_report
from .pipeline import ENGINES, run_pipeline
from .render import render_svg
from .topology import PRESETS, gen_topology, preset

logger = logging.getLogger("qlayout")


def _out(args, name: str) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out / name


def cmd_gen(args, cfg):
    geo = cfg.geometry
    net = gen_topology(preset(args.topology, seed=args.seed), geo.pitch_um, geo.qubit_size_um, geo.pad_um)
    path = _out(args, f"{args.topology}.netlist.json")
    save_netlist(net, path)
    print(path)


def cmd_gp(args, cfg):
    net = load_netlist(args.netlist)
    geo = cfg.geometry
    noise = geo.gp_noise if args.noise is None else args.noise
    layout = synthetic_gp(net, seed=args.seed, noise=noise, margin=geo.gp_margin)
    # the GP step may have sized the substrate; keep the netlist in step
    save_netlist(net, args.netlist)
    path = _out(args, "gp.json")
    save_placement(layout, path, "gp", {"seed": args.seed, "noise": noise})
    print(path)


def cmd_legalize(args, cfg):
    net = load_netlist(args.netlist)
    gp, _, _ = load_placement(net, args.gp)
    programs = sample_programs(net, cfg.program_qubits, cfg.program_samples, seed=args.seed)
    layout, reports = run_pipeline(gp, args.engine, cfg, programs, run_dp=False)
    path = _out(args, f"placement_{args.engine}.json")
    meta = {"engine": args.engine, "qubit_spacing_cells": int(layout.meta["qubit_spacing_cells"])}
    save_placement(layout, path, "lg", meta)
    report = {k: {"ms": r.ms, "metrics": r.metrics, **r.extra} for k, r in reports.items()}
    _out(args, f"report_{args.engine}.json").write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")
    print(path)


def cmd_dp(args, cfg):
    net = load_netlist(args.netlist)
    layout, _, meta = load_placement(net, args.placement)
    if args.gp:
        layout.gp = load_placement(net, args.gp)[0].gp
    result = detailed_place(layout, cfg.dp, cfg.hotspot)
    path = _out(args, "placement_dp.json")
    save_placement(layout, path, "dp", {**meta, "dp_accepted": result.accepted})
    _out(args, "dp_log.json").write_text(json.dumps(result.log, indent=1, sort_keys=True) + "\n")
    print(path)


def cmd_metrics(args, cfg):
    net = load_netlist(args.netlist)
    layout, _, _ = load_placement(net, args.placement)
    programs = sample_programs(net, cfg.program_qubits, cfg.program_samples, seed=args.seed)
    report = metrics_report(layout, cfg.hotspot, cfg.error_model, programs)
    report["violations"] = validate(layout).to_dict(net)["counts"]
    text = json.dumps(report, indent=1, sort_keys=True) + "\n"
    _out(args, "metrics.json").write_text(text)
    sys.stdout.write(text)


def cmd_render(args, cfg):
    net = load_netlist(args.netlist)
    layout, _, _ = load_placement(net, args.placement)
    path = _out(args, args.name)
    render_svg(layout, path, validate(layout) if args.violations else None)
    print(path)


def cmd_bench(args, cfg):
    seeds = list(range(args.seed, args.seed + args.seeds))
    report = bench(args.topologies, args.engines, seeds, cfg)
    csv_path, md_path = write_report(report, args.out)
    sys.stdout.write(report.to_markdown())
    print(csv_path)


def build_parser() -> argparse.ArgumentParser:
    def global_flags(parser, default):
        # subcommands repeat the flags with suppressed defaults so values given
        # before the subcommand are not overwritten
        d = (lambda v: v) if default else (lambda v: argparse.SUPPRESS)
        parser.add_argument("--config", default=d(None), help="JSON config file")
        parser.add_argument("--seed", type=int, default=d(0))
        parser.add_argument("--out", default=d("."), help="output directory")
        parser.add_argument("-v", "--verbose", action="store_true", default=d(False))

    common = argparse.ArgumentParser(add_help=False)
    global_flags(common, False)
    p = argparse.ArgumentParser(prog="qlayout", description="Qubit/resonator layout legalization")
    global_flags(p, True)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen", parents=[common], help="topology -> netlist file")
    s.add_argument("topology", choices=sorted(PRESETS))
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("gp", parents=[common], help="netlist -> synthetic GP placement")
    s.add_argument("netlist")
    s.add_argument("--noise", type=float, help="jitter sigma in cells")
    s.set_defaults(func=cmd_gp)

    s = sub.add_parser("legalize", parents=[common], help="GP placement -> legal placement")
    s.add_argument("netlist")
    s.add_argument("gp")
    s.add_argument("--engine", choices=sorted(ENGINES), default="qgdp")
    s.set_defaults(func=cmd_legalize)

    s = sub.add_parser("dp", parents=[common], help="detailed placement of a legal placement")
    s.add_argument("netlist")
    s.add_argument("placement")
    s.add_argument("--gp", help="GP placement used for routing attachment targets")
    s.set_defaults(func=cmd_dp)

    s = sub.add_parser("metrics", parents=[common], help="metrics report of a placement")
    s.add_argument("netlist")
    s.add_argument("placement")
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("render", parents=[common], help="placement -> SVG")
    s.add_argument("netlist")
    s.add_argument("placement")
    s.add_argument("--name", default="layout.svg")
    s.add_argument("--violations", action="store_true", help="mark violations in red")
    s.set_defaults(func=cmd_render)

    s = sub.add_parser("bench", parents=[common], help="topology x engine x seed benchmark")
    s.add_argument("--topologies", nargs="+", default=sorted(PRESETS), choices=sorted(PRESETS))
    s.add_argument("--engines", nargs="+", default=sorted(ENGINES), choices=sorted(ENGINES))
    s.add_argument("--seeds", type=int, default=3, help="number of seeds starting at --seed")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        args.func(args, cfg)
    except LayoutError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0
