"""Quantum netlist: qubits, resonator edges and their wire blocks.

Every placeable object gets a dense *component id* (cid).  Qubits take
``0 .. nq-1`` in netlist order, wire blocks follow as ``nq .. nq+nb-1``.
All per-component arrays on :class:`NetGraph` and
:class:`~qlayout.layout.Layout` are indexed by cid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidArgumentError

PITCH_UM = 300.0
QUBIT_SIZE_UM = 400.0
PAD_UM = 100.0
PHASE_VELOCITY = 1.3e8  # m/s in the coplanar waveguide


def partition_resonator(length_um: float, pad_um: float, cell_um: float) -> int:
    """Number of wire blocks reserving the padded area of one resonator.

    ``n = ceil(pad * L / cell**2)`` so the reserved area never falls short of
    the padded wire.
    """
    for name, value in (("length", length_um), ("pad", pad_um), ("cell", cell_um)):
        if not value > 0:
            raise InvalidArgumentError(f"{name} must be positive, got {value!r}")
    ratio = pad_um * length_um / (cell_um * cell_um)
    # absorb representation noise such as 10.000000000000002
    n = math.ceil(ratio - 1e-12 * max(1.0, ratio))
    return max(1, n)


def resonator_length_um(freq_ghz: float, velocity: float = PHASE_VELOCITY) -> float:
    """Half-wave resonator length L = v / (2 f), in micrometres."""
    if not freq_ghz > 0:
        raise InvalidArgumentError(f"frequency must be positive, got {freq_ghz!r}")
    return velocity / (2.0 * freq_ghz * 1e9) * 1e6


def footprint_cells(size_um: float, pitch_um: float) -> int:
    return max(1, math.ceil(size_um / pitch_um - 1e-9))


def raster_shape(n: int) -> Tuple[int, int]:
    """(cols, rows) of the near-square raster holding ``n`` blocks."""
    cols = math.ceil(math.sqrt(n))
    rows = math.ceil(n / cols)
    return cols, rows


def raster_coords(n: int) -> List[Tuple[int, int]]:
    cols, _ = raster_shape(n)
    return [(k % cols, k // cols) for k in range(n)]


@dataclass(frozen=True)
class Qubit:
    id: int
    freq: float
    size_um: Tuple[float, float] = (QUBIT_SIZE_UM, QUBIT_SIZE_UM)
    coord: Optional[Tuple[float, float]] = None  # ideal topology position, unitless

    def __post_init__(self):
        if not self.freq > 0:
            raise InvalidArgumentError(f"qubit {self.id}: frequency must be positive")


@dataclass(frozen=True)
class WireBlock:
    id: int  # component id
    parent: int  # edge id
    index: int
    freq: float


@dataclass
class ResonatorEdge:
    id: int
    q1: int
    q2: int
    freq: float
    length_um: float
    pad_um: float = PAD_UM
    blocks: List[int] = field(default_factory=list)  # component ids, raster order
    pseudo_pins: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)


def pseudo_connect(edge: ResonatorEdge, q1_cid: int, q2_cid: int) -> List[Tuple[int, int]]:
    """Pin pairs tying an edge's blocks into a compact rectangular net.

    Blocks sit row-major on a raster of ``ceil(sqrt(n))`` columns; every
    4-adjacent raster pair becomes a pin pair.  The raster runs from the
    first endpoint toward the second, so ``q1`` attaches to the first block
    and ``q2`` to the last one.
    """
    n = len(edge.blocks)
    cols, _ = raster_shape(n)
    pairs = []
    for k in range(n):
        if (k + 1) % cols and k + 1 < n:
            pairs.append((edge.blocks[k], edge.blocks[k + 1]))
        if k + cols < n:
            pairs.append((edge.blocks[k], edge.blocks[k + cols]))
    pairs.append((q1_cid, edge.blocks[0]))
    pairs.append((q2_cid, edge.blocks[-1]))
    return pairs


class NetGraph:
    """Undirected quantum netlist with per-edge wire-block lists."""

    def __init__(
        self,
        qubits: Sequence[Qubit],
        edges: Sequence[ResonatorEdge],
        pitch_um: float = PITCH_UM,
        substrate_um: Tuple[float, float] = (0.0, 0.0),
        name: str = "",
    ):
        if not pitch_um > 0:
            raise InvalidArgumentError("pitch must be positive")
        self.name = name
        self.pitch = float(pitch_um)
        self.qubits: List[Qubit] = list(qubits)
        self.qubit_index: Dict[int, int] = {}
        for cid, q in enumerate(self.qubits):
            if q.id in self.qubit_index:
                raise InvalidArgumentError(f"duplicate qubit id {q.id}")
            self.qubit_index[q.id] = cid
        self.edges: List[ResonatorEdge] = []
        self.edge_index: Dict[int, int] = {}
        self.blocks: List[WireBlock] = []
        cid = len(self.qubits)
        for e in edges:
            if e.id in self.edge_index:
                raise InvalidArgumentError(f"duplicate edge id {e.id}")
            if e.q1 == e.q2:
                raise InvalidArgumentError(f"edge {e.id}: endpoints must differ")
            for q in (e.q1, e.q2):
                if q not in self.qubit_index:
                    raise InvalidArgumentError(f"edge {e.id}: unknown qubit {q}")
            if not e.freq > 0:
                raise InvalidArgumentError(f"edge {e.id}: frequency must be positive")
            n = partition_resonator(e.length_um, e.pad_um, self.pitch)
            e.blocks = list(range(cid, cid + n))
            for k in range(n):
                self.blocks.append(WireBlock(cid + k, e.id, k, e.freq))
            cid += n
            e.pseudo_pins = pseudo_connect(e, self.qubit_index[e.q1], self.qubit_index[e.q2])
            self.edge_index[e.id] = len(self.edges)
            self.edges.append(e)
        self.substrate_um = (0.0, 0.0)
        self._build_arrays()
        if substrate_um[0] > 0 and substrate_um[1] > 0:
            self.set_substrate(substrate_um)

    def _build_arrays(self):
        nq, nb = len(self.qubits), len(self.blocks)
        n = nq + nb
        self.nq = nq
        self.n = n
        self.size = np.ones((n, 2), dtype=np.int64)
        self.freq = np.zeros(n)
        self.is_qubit = np.zeros(n, dtype=bool)
        self.is_qubit[:nq] = True
        # edge position (index into self.edges) per component, -1 for qubits
        self.edge_of = np.full(n, -1, dtype=np.int64)
        for cid, q in enumerate(self.qubits):
            self.size[cid] = (
                footprint_cells(q.size_um[0], self.pitch),
                footprint_cells(q.size_um[1], self.pitch),
            )
            self.freq[cid] = q.freq
        for k, e in enumerate(self.edges):
            self.edge_of[e.blocks] = k
            self.freq[e.blocks] = e.freq
        # endpoint component ids per edge position
        self.endpoints = np.array(
            [(self.qubit_index[e.q1], self.qubit_index[e.q2]) for e in self.edges],
            dtype=np.int64,
        ).reshape(-1, 2)

    def set_substrate(self, substrate_um: Tuple[float, float]):
        w, h = substrate_um
        for v in (w, h):
            ratio = v / self.pitch
            if v <= 0 or abs(ratio - round(ratio)) > 1e-9:
                raise InvalidArgumentError(
                    f"substrate {substrate_um} must be positive multiples of pitch {self.pitch}"
                )
        self.substrate_um = (float(w), float(h))

    @property
    def grid_shape(self) -> Tuple[int, int]:
        """Substrate (width, height) in cells."""
        return (
            int(round(self.substrate_um[0] / self.pitch)),
            int(round(self.substrate_um[1] / self.pitch)),
        )

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def name_of(self, cid: int) -> str:
        if cid < self.nq:
            return f"q{self.qubits[cid].id}"
        b = self.blocks[cid - self.nq]
        return f"e{b.parent}.{b.index}"

    def cid_of(self, name: str) -> int:
        if name.startswith("q"):
            return self.qubit_index[int(name[1:])]
        eid, idx = name[1:].split(".")
        return self.edges[self.edge_index[int(eid)]].blocks[int(idx)]

    def edge(self, eid: int) -> ResonatorEdge:
        return self.edges[self.edge_index[eid]]

    def component_count(self) -> int:
        """Movable components counting each qubit and block once."""
        return self.n

    def footprint_area(self) -> int:
        """Occupied cells counting qubit footprints in full."""
        return int(np.prod(self.size, axis=1).sum())

    def adjacency(self) -> Dict[int, List[int]]:
        adj: Dict[int, List[int]] = {q.id: [] for q in self.qubits}
        for e in self.edges:
            adj[e.q1].append(e.q2)
            adj[e.q2].append(e.q1)
        return adj

    def __repr__(self):
        return (
            f"NetGraph({self.name or 'unnamed'}: {self.nq} qubits, {len(self.edges)} edges, "
            f"{len(self.blocks)} blocks)"
        )
