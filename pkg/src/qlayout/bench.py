"""Benchmark harness: topology x engine x seed grid with CSV/Markdown output."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .config import Config
from .errors import InvalidArgumentError, LayoutError
from .gp import sample_programs, synthetic_gp
from .metrics import displacement_stats
from .pipeline import ENGINES, run_pipeline
from .topology import gen_topology, preset

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ["sum_clusters", "unified", "total_edges", "I_edge", "X", "P_h_percent", "H_Q", "fidelity", "disp_mean", "disp_max"]
RUNTIME_COLUMNS = ["t_q_ms", "t_e_ms", "t_dp_ms"]


@dataclass
class BenchRow:
    topology: str
    engine: str
    seeds: int
    failures: int
    mean: Dict[str, float] = field(default_factory=dict)
    std: Dict[str, float] = field(default_factory=dict)
    errors: List[str] = field(default_factory=list)


@dataclass
class BenchReport:
    rows: List[BenchRow]
    stage: str  # which stage the metric columns describe

    def row(self, topology: str, engine: str) -> BenchRow:
        for r in self.rows:
            if r.topology == topology and r.engine == engine:
                return r
        raise KeyError((topology, engine))

    def to_csv(self, runtime: bool = True) -> str:
        cols = METRIC_COLUMNS + (RUNTIME_COLUMNS if runtime else [])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["topology", "engine", "seeds", "failures"] + [f"{c}_mean" for c in cols] + [f"{c}_std" for c in cols])
        for r in self.rows:
            w.writerow(
                [r.topology, r.engine, r.seeds, r.failures]
                + [_fmt(r.mean.get(c)) for c in cols]
                + [_fmt(r.std.get(c)) for c in cols]
            )
        return buf.getvalue()

    def to_markdown(self) -> str:
        head = "| Topology | Engine | t_q (ms) | t_e (ms) | sum C_e | I_edge | X | P_h (%) | H_Q | fidelity |"
        lines = [head, "|" + "---|" * (head.count("|") - 1)]
        for r in self.rows:
            m = r.mean
            if not m:
                lines.append(f"| {r.topology} | {r.engine} | failed ({r.failures}) | | | | | | | |")
                continue
            lines.append(
                f"| {r.topology} | {r.engine} | {m['t_q_ms']:.1f} | {m['t_e_ms']:.1f} | {m['sum_clusters']:.1f} "
                f"| {m['unified']:.1f}/{m['total_edges']:.0f} | {m['X']:.1f} | {m['P_h_percent']:.3f} | {m['H_Q']:.1f} "
                f"| {_fmt(m.get('fidelity'))} |"
            )
        return "\n".join(lines) + "\n"


def _fmt(v):
    if v is None or (isinstance(v, float) and np.isnan(v)):
        return ""
    return f"{v:.6g}"


def run_one(topology: str, engine: str, seed: int, config: Config) -> Dict[str, float]:
    geo = config.geometry
    spec = preset(topology, seed=seed)
    net = gen_topology(spec, geo.pitch_um, geo.qubit_size_um, geo.pad_um)
    gp = synthetic_gp(net, seed=seed, noise=geo.gp_noise, margin=geo.gp_margin)
    programs = sample_programs(net, config.program_qubits, config.program_samples, seed=seed)
    layout, reports = run_pipeline(gp, engine, config, programs)
    final = reports["dp"] if "dp" in reports else reports["resonator-lg"]
    m = final.metrics
    ll = np.floor(gp.gp_lower_left() + 0.5)
    _, dmean, dmax = displacement_stats(ll, layout.cells)
    return {
        "sum_clusters": m["sum_clusters"],
        "unified": m["I_edge"][0],
        "total_edges": m["I_edge"][1],
        "I_edge": m["I_edge"][0] / m["I_edge"][1] if m["I_edge"][1] else 1.0,
        "X": m["X"],
        "P_h_percent": m["P_h_percent"],
        "H_Q": m["H_Q"],
        "fidelity": m["fidelity"] if m["fidelity"] is not None else float("nan"),
        "disp_mean": dmean,
        "disp_max": dmax,
        "t_q_ms": reports["qubit-lg"].ms,
        "t_e_ms": reports["resonator-lg"].ms,
        "t_dp_ms": reports["dp"].ms if "dp" in reports else 0.0,
    }


def bench(
    topologies: Sequence[str],
    engines: Sequence[str],
    seeds: Sequence[int],
    config: Optional[Config] = None,
) -> BenchReport:
    """Run every (topology, engine, seed); failures are recorded, not raised."""
    if not topologies or not engines or not seeds:
        raise InvalidArgumentError("bench needs at least one topology, engine and seed")
    for e in engines:
        if e not in ENGINES:
            raise InvalidArgumentError(f"unknown engine {e!r}")
    config = config or Config()
    rows = []
    for topo in topologies:
        for engine in engines:
            runs, errors = [], []
            for seed in seeds:
                try:
                    runs.append(run_one(topo, engine, seed, config))
                except LayoutError as exc:
                    logger.warning("%s/%s seed %d failed: %s", topo, engine, seed, exc)
                    errors.append(f"seed {seed}: {exc}")
            row = BenchRow(topo, engine, len(seeds), len(errors), errors=errors)
            if runs:
                for c in METRIC_COLUMNS + RUNTIME_COLUMNS:
                    vals = np.array([r[c] for r in runs], dtype=float)
                    row.mean[c] = float(np.mean(vals))
                    row.std[c] = float(np.std(vals))
            rows.append(row)
    return BenchReport(rows, "dp" if config.run_dp else "resonator-lg")


def write_report(report: BenchReport, out_dir, stem: str = "bench"):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{stem}.csv").write_text(report.to_csv())
    (out / f"{stem}.md").write_text(report.to_markdown())
    return out / f"{stem}.csv", out / f"{stem}.md"
