"""Device topology generators and frequency assignment.

Every generator returns ideal unitless coordinates per qubit plus an edge
list; :func:`gen_topology` turns those into a :class:`NetGraph` with qubit
and resonator frequencies.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Tuple

import networkx as nx
import numpy as np

from .errors import InvalidArgumentError
from .netlist import PAD_UM, PITCH_UM, QUBIT_SIZE_UM, NetGraph, Qubit, ResonatorEdge, resonator_length_um

logger = logging.getLogger(__name__)

Coords = Dict[int, Tuple[float, float]]
EdgeList = List[Tuple[int, int]]


@dataclass
class TopologySpec:
    kind: str  # grid | heavy-hex | octagon | xtree
    rows: int = 5
    cols: int = 5
    variant: str = "falcon"  # heavy-hex only: falcon | eagle
    depth: int = 3  # xtree only
    qubit_freq: Tuple[float, float] = (4.8, 5.2)
    resonator_freq: Tuple[float, float] = (6.0, 7.0)
    seed: int = 0
    name: str = ""


PRESETS: Dict[str, dict] = {
    "grid": dict(kind="grid", rows=5, cols=5),
    "falcon": dict(kind="heavy-hex", variant="falcon"),
    "eagle": dict(kind="heavy-hex", variant="eagle"),
    "aspen-11": dict(kind="octagon", rows=1, cols=5),
    "aspen-m": dict(kind="octagon", rows=2, cols=5),
    "xtree": dict(kind="xtree", depth=3),
}


def preset(name: str, seed: int = 0) -> TopologySpec:
    try:
        params = PRESETS[name]
    except KeyError:
        raise InvalidArgumentError(f"unknown topology preset {name!r}; choose from {sorted(PRESETS)}") from None
    return TopologySpec(seed=seed, name=name, **params)


# -- lattices ---------------------------------------------------------------


def grid_lattice(rows: int, cols: int) -> Tuple[Coords, EdgeList]:
    coords = {r * cols + c: (float(c), float(r)) for r in range(rows) for c in range(cols)}
    edges = []
    for r in range(rows):
        for c in range(cols):
            q = r * cols + c
            if c + 1 < cols:
                edges.append((q, q + 1))
            if r + 1 < rows:
                edges.append((q, q + cols))
    return coords, edges


# 27-qubit heavy-hex device as drawn by the vendor: two long rows joined
# by three bridge qubits, plus four pendant qubits.
_FALCON_COORDS = {
    0: (0, 2), 1: (1, 2), 4: (2, 2), 7: (3, 2), 10: (4, 2), 12: (5, 2), 15: (6, 2), 18: (7, 2), 21: (8, 2), 23: (9, 2),
    2: (1, 1), 13: (5, 1), 24: (9, 1),
    3: (1, 0), 5: (2, 0), 8: (3, 0), 11: (4, 0), 14: (5, 0), 16: (6, 0), 19: (7, 0), 22: (8, 0), 25: (9, 0), 26: (10, 0),
    6: (3, 3), 17: (7, 3), 9: (3, -1), 20: (7, -1),
}
_FALCON_EDGES = [
    (0, 1), (1, 2), (1, 4), (2, 3), (3, 5), (4, 7), (5, 8), (6, 7), (7, 10), (8, 9), (8, 11), (10, 12),
    (11, 14), (12, 13), (12, 15), (13, 14), (14, 16), (15, 18), (16, 19), (17, 18), (18, 21), (19, 20),
    (19, 22), (21, 23), (22, 25), (23, 24), (24, 25), (25, 26),
]


def falcon_lattice() -> Tuple[Coords, EdgeList]:
    return {q: (float(x), float(y)) for q, (x, y) in _FALCON_COORDS.items()}, list(_FALCON_EDGES)


def eagle_lattice() -> Tuple[Coords, EdgeList]:
    """127-qubit heavy-hex: 7 long rows (14, 15 x 5, 14) joined by 4 bridges per gap.

    Row 0 spans x = 0..13, rows 1-5 span 0..14, row 6 spans 1..14.  Bridges
    sit at x = 0, 4, 8, 12 below even rows and x = 2, 6, 10, 14 below odd
    rows.  Qubits are numbered row by row, each row followed by the
    bridges beneath it.
    """
    coords: Coords = {}
    edges: EdgeList = []
    row_ids: List[Dict[int, int]] = []
    q = 0
    spans = [(0, 13)] + [(0, 14)] * 5 + [(1, 14)]
    pending: List[Tuple[int, int]] = []  # (bridge id, x) waiting for the next row
    for r, (x0, x1) in enumerate(spans):
        ids = {}
        for x in range(x0, x1 + 1):
            ids[x] = q
            coords[q] = (float(x), float(-2 * r))
            if x > x0:
                edges.append((q - 1, q))
            q += 1
        for b, x in pending:
            edges.append((b, ids[x]))
        pending = []
        row_ids.append(ids)
        if r + 1 < len(spans):
            for x in ((0, 4, 8, 12) if r % 2 == 0 else (2, 6, 10, 14)):
                coords[q] = (float(x), float(-2 * r - 1))
                edges.append((ids[x], q))
                pending.append((q, x))
                q += 1
    return coords, edges


_OCTAGON = [(1, 0), (2, 0), (3, 1), (3, 2), (2, 3), (1, 3), (0, 2), (0, 1)]


def octagon_lattice(rows: int, cols: int) -> Tuple[Coords, EdgeList]:
    """Rings of 8 qubits; side-by-side rings share 2 links, stacked rings 2 links."""
    coords: Coords = {}
    edges: EdgeList = []

    def qid(r, c, k):
        return (r * cols + c) * 8 + k

    for r in range(rows):
        for c in range(cols):
            for k, (x, y) in enumerate(_OCTAGON):
                coords[qid(r, c, k)] = (float(4 * c + x), float(4 * r + y))
                edges.append(tuple(sorted((qid(r, c, k), qid(r, c, (k + 1) % 8)))))
            if c + 1 < cols:  # right side (2, 3) to left side (7, 6)
                edges.append((qid(r, c, 2), qid(r, c + 1, 7)))
                edges.append((qid(r, c, 3), qid(r, c + 1, 6)))
            if r + 1 < rows:  # top (5, 4) to bottom (0, 1)
                edges.append((qid(r, c, 5), qid(r + 1, c, 0)))
                edges.append((qid(r, c, 4), qid(r + 1, c, 1)))
    return coords, edges


def xtree_lattice(depth: int, root_children: int = 4, children: int = 3) -> Tuple[Coords, EdgeList]:
    """Tree with a 4-way root and 3-way inner nodes, laid out radially."""
    levels = [[0]]
    edges: EdgeList = []
    parent = {0: None}
    q = 1
    for d in range(depth):
        nxt = []
        for p in levels[-1]:
            for _ in range(root_children if d == 0 else children):
                edges.append((p, q))
                parent[q] = p
                nxt.append(q)
                q += 1
        levels.append(nxt)
    coords: Coords = {0: (0.0, 0.0)}
    # angle of a node = mean angle of its leaves; leaves spread evenly
    leaves = levels[-1]
    angle = {leaf: 2 * math.pi * i / len(leaves) for i, leaf in enumerate(leaves)}
    for d in range(depth - 1, 0, -1):
        for p in levels[d]:
            kids = [c for c in levels[d + 1] if parent[c] == p]
            angle[p] = float(np.mean([angle[k] for k in kids]))
    for d in range(1, depth + 1):
        radius = 1.5 * d
        for v in levels[d]:
            coords[v] = (radius * math.cos(angle[v]), radius * math.sin(angle[v]))
    return coords, edges


def lattice(spec: TopologySpec) -> Tuple[Coords, EdgeList]:
    if spec.kind == "grid":
        return grid_lattice(spec.rows, spec.cols)
    if spec.kind == "heavy-hex":
        if spec.variant == "falcon":
            return falcon_lattice()
        if spec.variant == "eagle":
            return eagle_lattice()
        raise InvalidArgumentError(f"unknown heavy-hex variant {spec.variant!r}")
    if spec.kind == "octagon":
        return octagon_lattice(spec.rows, spec.cols)
    if spec.kind == "xtree":
        return xtree_lattice(spec.depth)
    raise InvalidArgumentError(f"unknown topology kind {spec.kind!r}")


# -- frequencies ------------------------------------------------------------


def qubit_frequencies(graph: nx.Graph, lo: float, hi: float) -> Dict[int, float]:
    """Greedy colouring; colour classes spread evenly over [lo, hi]."""
    colors = nx.greedy_color(graph, strategy="largest_first")
    k = max(colors.values()) + 1
    step = (hi - lo) / (k - 1) if k > 1 else 0.0
    return {q: lo + c * step if k > 1 else (lo + hi) / 2 for q, c in colors.items()}


def resonator_frequencies(edges: EdgeList, lo: float, hi: float, rng: np.random.Generator) -> List[float]:
    """Evenly spaced frequencies, ordered so edges sharing a qubit are far apart.

    Edges are coloured on the line graph; ascending frequency slots are
    handed out colour class by colour class (shuffled within a class).
    """
    m = len(edges)
    if m == 0:
        return []
    lg = nx.Graph()
    lg.add_nodes_from(range(m))
    by_qubit: Dict[int, List[int]] = {}
    for k, (a, b) in enumerate(edges):
        by_qubit.setdefault(a, []).append(k)
        by_qubit.setdefault(b, []).append(k)
    for ks in by_qubit.values():
        for i in range(len(ks)):
            for j in range(i + 1, len(ks)):
                lg.add_edge(ks[i], ks[j])
    colors = nx.greedy_color(lg, strategy="largest_first")
    order = sorted(range(m), key=lambda k: (colors[k], k))
    # shuffle inside each colour class
    out_order = []
    k = 0
    while k < m:
        j = k
        while j < m and colors[order[j]] == colors[order[k]]:
            j += 1
        block = order[k:j]
        rng.shuffle(block)
        out_order.extend(block)
        k = j
    slots = lo + (np.arange(m) + 0.5) * (hi - lo) / m
    freqs = [0.0] * m
    for slot, k in zip(slots, out_order):
        freqs[k] = round(float(slot), 9)
    return freqs


def gen_topology(
    spec: TopologySpec,
    pitch_um: float = PITCH_UM,
    qubit_size_um: float = QUBIT_SIZE_UM,
    pad_um: float = PAD_UM,
) -> NetGraph:
    """Build a netlist with frequencies and resonator lengths for ``spec``."""
    coords, edges = lattice(spec)
    graph = nx.Graph()
    graph.add_nodes_from(sorted(coords))
    graph.add_edges_from(edges)
    if not nx.is_connected(graph):
        raise InvalidArgumentError(f"topology {spec.kind} is not connected")
    rng = np.random.default_rng(spec.seed)
    qf = qubit_frequencies(graph, *spec.qubit_freq)
    ef = resonator_frequencies(edges, *spec.resonator_freq, rng)
    qubits = [Qubit(q, round(qf[q], 9), (qubit_size_um, qubit_size_um), coords[q]) for q in sorted(coords)]
    res = [
        ResonatorEdge(k, a, b, f, resonator_length_um(f), pad_um)
        for k, ((a, b), f) in enumerate(zip(edges, ef))
    ]
    net = NetGraph(qubits, res, pitch_um, name=spec.name or spec.kind)
    logger.debug("generated %r", net)
    return net
