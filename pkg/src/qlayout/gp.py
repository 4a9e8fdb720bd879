"""Synthetic global placement and substrate sizing.

Stands in for an analytic global placer: qubits go to their ideal lattice
coordinates scaled onto the substrate, each resonator's blocks sit on
their pseudo-connection raster around the edge midpoint, and everything
gets Gaussian jitter.  The result is usually illegal, which is the point.
"""

from __future__ import annotations

import math
from typing import Optional, Tuple

import networkx as nx
import numpy as np

from .errors import CapacityError, InvalidArgumentError
from .layout import Layout
from .metrics import ProgramFootprint
from .netlist import NetGraph, raster_coords
from .qubit_lg import build_constraint_graphs, longest_path

DEFAULT_AREA_FACTOR = 1.8


def lattice_extent(net: NetGraph, spacing: int = 2) -> Tuple[float, float]:
    """Cells needed per axis to hold the ideal qubit lattice at ``spacing``."""
    ideal = np.array([q.coord if q.coord is not None else (0.0, 0.0) for q in net.qubits], dtype=float)
    if net.nq == 0:
        return 0.0, 0.0
    hcg, vcg = build_constraint_graphs(list(range(net.nq)), ideal, net.size[: net.nq], spacing)
    return longest_path(hcg)[0], longest_path(vcg)[0]


def size_substrate(
    net: NetGraph,
    area_factor: float = DEFAULT_AREA_FACTOR,
    spacing: int = 1,
    margin: float = 2.0,
) -> Tuple[float, float]:
    """Smallest square substrate (multiple of pitch) with area >= factor x footprint.

    The side is raised, if needed, so the ideal qubit lattice fits at
    ``spacing`` with ``margin`` free cells on each border; elongated
    lattices would otherwise be infeasible for any legalizer.
    """
    if not area_factor > 0:
        raise InvalidArgumentError("area_factor must be positive")
    side = max(int(math.ceil(math.sqrt(area_factor * net.footprint_area()) - 1e-9)), int(net.size.max()))
    lw, lh = lattice_extent(net, spacing)
    side = max(side, int(math.ceil(max(lw, lh) + 2 * margin - 1e-9)))
    return (side * net.pitch, side * net.pitch)


def synthetic_gp(
    net: NetGraph,
    substrate_um: Optional[Tuple[float, float]] = None,
    seed: int = 0,
    noise: float = 0.5,
    margin: float = 2.0,
) -> Layout:
    """GP centres (um) for every component; returns an unplaced :class:`Layout`.

    ``noise`` is the jitter standard deviation in cells; ``margin`` keeps
    ideal qubit positions that many cells away from the substrate border.
    """
    if noise < 0:
        raise InvalidArgumentError("noise must be non-negative")
    if substrate_um is not None:
        net.set_substrate(substrate_um)
    elif net.substrate_um[0] <= 0:
        net.set_substrate(size_substrate(net))
    width, height = net.grid_shape
    if width * height < net.footprint_area():
        raise CapacityError(
            f"substrate {width}x{height} cells cannot hold {net.footprint_area()} cells",
            required=net.footprint_area(), available=width * height,
        )
    rng = np.random.default_rng(seed)
    pitch = net.pitch
    gp = np.zeros((net.n, 2))

    ideal = np.array([q.coord if q.coord is not None else (0.0, 0.0) for q in net.qubits], dtype=float)
    half = net.size[: net.nq].max(axis=0) / 2.0
    lo = margin + half
    hi = np.array([width, height], dtype=float) - margin - half
    span = ideal.max(axis=0) - ideal.min(axis=0)
    scale = np.where(span > 0, (hi - lo) / np.where(span > 0, span, 1), 0.0)
    centre_cells = np.where(span > 0, lo + (ideal - ideal.min(axis=0)) * scale, (width / 2.0, height / 2.0))
    gp[: net.nq] = centre_cells * pitch

    for k, edge in enumerate(net.edges):
        a, b = net.endpoints[k]
        mid = (gp[a] + gp[b]) / 2.0
        n = edge.n_blocks
        rc = np.array(raster_coords(n), dtype=float)
        rc -= (rc.max(axis=0)) / 2.0
        gp[edge.blocks] = mid + rc * pitch

    if noise > 0:
        gp += rng.normal(0.0, noise * pitch, size=gp.shape)
    return Layout(net, gp)


def sample_programs(
    net: NetGraph,
    k: int = 5,
    count: int = 50,
    seed: int = 0,
    gates_per_degree: int = 10,
    duration: float = 1.0,
) -> list:
    """Random connected k-qubit footprints with gate counts proportional to degree."""
    graph = nx.Graph()
    graph.add_nodes_from(q.id for q in net.qubits)
    for e in net.edges:
        graph.add_edge(e.q1, e.q2, id=e.id)
    k = max(1, min(k, net.nq))
    rng = np.random.default_rng(seed)
    nodes = sorted(graph.nodes)
    out = []
    for _ in range(count):
        chosen = {nodes[int(rng.integers(len(nodes)))]}
        frontier = set()
        while len(chosen) < k:
            for q in chosen:
                frontier.update(graph.neighbors(q))
            frontier -= chosen
            if not frontier:
                break
            cand = sorted(frontier)
            chosen.add(cand[int(rng.integers(len(cand)))])
        sub = graph.subgraph(chosen)
        edges = {d["id"] for _, _, d in sub.edges(data=True)}
        g1 = {q: gates_per_degree * max(sub.degree(q), 1) for q in sorted(chosen)}
        g2 = {q: gates_per_degree * sub.degree(q) // 2 for q in sorted(chosen)}
        out.append(ProgramFootprint(set(chosen), edges, g1, g2, duration))
    return out
