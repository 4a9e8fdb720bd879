"""Grid legalization and detailed placement for superconducting qubit layouts.

Qubits are macros legalized through constraint graphs; each coupling
resonator is split into unit wire blocks that are legalized so the blocks
of one resonator stay together.  A window-based maze router then repairs
split resonators and frequency hotspots.
"""

from .config import Config, load_config
from .detailed import DPConfig, build_window, detailed_place, find_violations, maze_route
from .errors import (
    CapacityError,
    InfeasibleError,
    InvalidArgumentError,
    InvariantError,
    LayoutError,
    PreconditionError,
    RouteFailure,
)
from .fileio import load_netlist, load_placement, save_netlist, save_placement
from .gp import sample_programs, size_substrate, synthetic_gp
from .layout import Layout, compute_clusters, cluster_counts, validate
from .metrics import (
    ErrorModelConfig,
    HotspotConfig,
    ProgramFootprint,
    count_crossings,
    crosstalk_pair_error,
    displacement_stats,
    hotspot_proportion,
    metrics_report,
    program_fidelity,
)
from .netlist import NetGraph, Qubit, ResonatorEdge, partition_resonator
from .pipeline import ENGINES, run_pipeline
from .qubit_lg import SpacingPolicy, build_constraint_graphs, legalize_qubits, solve_axis
from .render import render_svg
from .resonator_lg import abacus_legalize, legalize_resonators, tetris_legalize
from .topology import PRESETS, TopologySpec, gen_topology, preset

__all__ = [
    "abacus_legalize",
    "build_constraint_graphs",
    "build_window",
    "CapacityError",
    "cluster_counts",
    "compute_clusters",
    "Config",
    "count_crossings",
    "crosstalk_pair_error",
    "detailed_place",
    "displacement_stats",
    "DPConfig",
    "ENGINES",
    "ErrorModelConfig",
    "find_violations",
    "gen_topology",
    "hotspot_proportion",
    "HotspotConfig",
    "InfeasibleError",
    "InvalidArgumentError",
    "InvariantError",
    "Layout",
    "LayoutError",
    "legalize_qubits",
    "legalize_resonators",
    "load_config",
    "load_netlist",
    "load_placement",
    "maze_route",
    "metrics_report",
    "NetGraph",
    "partition_resonator",
    "PreconditionError",
    "preset",
    "PRESETS",
    "program_fidelity",
    "ProgramFootprint",
    "Qubit",
    "render_svg",
    "ResonatorEdge",
    "RouteFailure",
    "run_pipeline",
    "sample_programs",
    "save_netlist",
    "save_placement",
    "size_substrate",
    "solve_axis",
    "SpacingPolicy",
    "synthetic_gp",
    "tetris_legalize",
    "TopologySpec",
    "validate",
]

__version__ = "0.1.0"
