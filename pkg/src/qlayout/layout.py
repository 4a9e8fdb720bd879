"""Grid layout state, cluster partitioning and legality checking."""

from __future__ import annotations

import bisect
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from .errors import PreconditionError
from .netlist import NetGraph

FREE = -1
SHARED = -2

_NEIGHBORS4 = ((1, 0), (-1, 0), (0, 1), (0, -1))


class Layout:
    """Component positions on the substrate grid plus an occupancy index.

    Positions are integer lower-left cells in ``cells``; ``gp`` keeps the
    continuous global-placement centres in micrometres.  The occupancy grid
    ``owner[y, x]`` holds a component id, ``FREE`` or ``SHARED`` (more than
    one occupant, the occupants then live in ``_shared``).  Cells outside
    the substrate are never indexed.
    """

    def __init__(self, net: NetGraph, gp: Optional[np.ndarray] = None):
        self.net = net
        self.pitch = net.pitch
        self.width, self.height = net.grid_shape
        if self.width <= 0 or self.height <= 0:
            raise PreconditionError("netlist has no substrate")
        n = net.n
        self.gp = np.full((n, 2), np.nan) if gp is None else np.array(gp, dtype=float)
        self.cells = np.zeros((n, 2), dtype=np.int64)
        self.placed = np.zeros(n, dtype=bool)
        self.fixed = np.zeros(n, dtype=bool)
        self.meta: Dict[str, object] = {}
        self.owner = np.full((self.height, self.width), FREE, dtype=np.int64)
        self._shared: Dict[Tuple[int, int], List[int]] = {}

    # -- occupancy ---------------------------------------------------------

    def _footprint(self, cid: int, x: int, y: int):
        w, h = self.net.size[cid]
        for yy in range(max(y, 0), min(y + h, self.height)):
            for xx in range(max(x, 0), min(x + w, self.width)):
                yield xx, yy

    def _add(self, xx: int, yy: int, cid: int):
        o = self.owner[yy, xx]
        if o == FREE:
            self.owner[yy, xx] = cid
        elif o == SHARED:
            bisect.insort(self._shared[(xx, yy)], cid)
        else:
            self.owner[yy, xx] = SHARED
            self._shared[(xx, yy)] = sorted((int(o), cid))

    def _drop(self, xx: int, yy: int, cid: int):
        o = self.owner[yy, xx]
        if o == cid:
            self.owner[yy, xx] = FREE
        elif o == SHARED:
            occupants = self._shared[(xx, yy)]
            occupants.remove(cid)
            if len(occupants) == 1:
                self.owner[yy, xx] = occupants[0]
                del self._shared[(xx, yy)]

    def place(self, cid: int, x: int, y: int):
        cid = int(cid)
        if self.placed[cid]:
            self.remove(cid)
        self.cells[cid] = (x, y)
        self.placed[cid] = True
        if self.net.size[cid, 0] == 1 and self.net.size[cid, 1] == 1:
            if 0 <= x < self.width and 0 <= y < self.height:
                self._add(int(x), int(y), cid)
            return
        for xx, yy in self._footprint(cid, int(x), int(y)):
            self._add(xx, yy, cid)

    def remove(self, cid: int):
        cid = int(cid)
        if not self.placed[cid]:
            return
        x, y = (int(v) for v in self.cells[cid])
        for xx, yy in self._footprint(cid, x, y):
            self._drop(xx, yy, cid)
        self.placed[cid] = False

    def rebuild_occupancy(self):
        self.owner.fill(FREE)
        self._shared = {}
        for cid in np.flatnonzero(self.placed):
            x, y = (int(v) for v in self.cells[cid])
            for xx, yy in self._footprint(int(cid), x, y):
                self._add(xx, yy, int(cid))

    def occupancy_map(self) -> Dict[Tuple[int, int], Tuple[int, ...]]:
        """Cell -> occupant ids, for inspection and equality checks."""
        out = {}
        ys, xs = np.nonzero(self.owner != FREE)
        for x, y in zip(xs.tolist(), ys.tolist()):
            o = int(self.owner[y, x])
            out[(x, y)] = tuple(self._shared[(x, y)]) if o == SHARED else (o,)
        return out

    def occupants(self, x: int, y: int) -> Tuple[int, ...]:
        if not (0 <= x < self.width and 0 <= y < self.height):
            return ()
        o = int(self.owner[y, x])
        if o == FREE:
            return ()
        if o == SHARED:
            return tuple(self._shared[(x, y)])
        return (o,)

    def is_free(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height and self.owner[y, x] == FREE

    # -- geometry ----------------------------------------------------------

    def center_um(self, cid: int) -> Tuple[float, float]:
        w, h = self.net.size[cid]
        x, y = self.cells[cid]
        return ((x + w / 2) * self.pitch, (y + h / 2) * self.pitch)

    def centers_um(self) -> np.ndarray:
        return (self.cells + self.net.size / 2.0) * self.pitch

    def gp_lower_left(self) -> np.ndarray:
        """GP positions as continuous lower-left cell coordinates."""
        return self.gp / self.pitch - self.net.size / 2.0

    def cells_of(self, cid: int) -> List[Tuple[int, int]]:
        x, y = (int(v) for v in self.cells[cid])
        w, h = (int(v) for v in self.net.size[cid])
        return [(x + i, y + j) for j in range(h) for i in range(w)]

    def snapshot(self) -> Tuple[bytes, bytes]:
        return self.cells.tobytes(), self.placed.tobytes()

    def copy(self) -> "Layout":
        other = Layout.__new__(Layout)
        other.net = self.net
        other.pitch = self.pitch
        other.width, other.height = self.width, self.height
        other.gp = self.gp.copy()
        other.cells = self.cells.copy()
        other.placed = self.placed.copy()
        other.fixed = self.fixed.copy()
        other.meta = dict(self.meta)
        other.owner = self.owner.copy()
        other._shared = {k: list(v) for k, v in self._shared.items()}
        return other

    def place_from_gp(self, cids: Optional[Iterable[int]] = None):
        """Snap components to the nearest cell of their GP position (may overlap)."""
        ll = np.floor(self.gp_lower_left() + 0.5).astype(np.int64)
        for cid in range(self.net.n) if cids is None else cids:
            self.place(cid, int(ll[cid, 0]), int(ll[cid, 1]))

    def __repr__(self):
        return f"Layout({self.width}x{self.height} cells, {int(self.placed.sum())}/{self.net.n} placed)"


# -- clusters ---------------------------------------------------------------


@dataclass
class ClusterPartition:
    edge: int
    clusters: List[List[int]]

    def __len__(self):
        return len(self.clusters)

    @property
    def unified(self) -> bool:
        return len(self.clusters) == 1


def _components(cells_by_block: Dict[int, Tuple[int, int]]) -> List[List[int]]:
    by_cell: Dict[Tuple[int, int], List[int]] = defaultdict(list)
    for b, c in cells_by_block.items():
        by_cell[c].append(b)
    seen = set()
    groups = []
    for start in sorted(by_cell):
        if start in seen:
            continue
        seen.add(start)
        stack = [start]
        members = []
        while stack:
            cx, cy = stack.pop()
            members.extend(by_cell[(cx, cy)])
            for dx, dy in _NEIGHBORS4:
                nb = (cx + dx, cy + dy)
                if nb in by_cell and nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        groups.append(sorted(members))
    groups.sort(key=lambda g: g[0])
    return groups


def compute_clusters(layout: Layout, edge_id: int) -> ClusterPartition:
    """Split an edge's blocks into 4-connected touching groups."""
    edge = layout.net.edge(edge_id)
    for b in edge.blocks:
        if not layout.placed[b]:
            raise PreconditionError(f"block {layout.net.name_of(b)} is not placed")
    cells = {b: (int(layout.cells[b, 0]), int(layout.cells[b, 1])) for b in edge.blocks}
    return ClusterPartition(edge_id, _components(cells))


def cluster_counts(layout: Layout, edges: Optional[Iterable[int]] = None) -> np.ndarray:
    """|C_e| per edge position (all edges unless a subset of positions is given)."""
    net = layout.net
    positions = range(net.n_edges) if edges is None else list(edges)
    out = np.zeros(len(positions), dtype=np.int64)
    for i, k in enumerate(positions):
        out[i] = len(compute_clusters(layout, net.edges[k].id))
    return out


# -- legality ---------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str  # overlap | border | qubit-spacing | hotspot | crossing
    participants: Tuple[int, ...]
    magnitude: float


@dataclass
class ViolationReport:
    entries: List[Violation] = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    def __bool__(self):
        return bool(self.entries)

    @property
    def is_empty(self) -> bool:
        return not self.entries

    def by_kind(self) -> Dict[str, int]:
        return dict(Counter(v.kind for v in self.entries))

    def of_kind(self, kind: str) -> List[Violation]:
        return [v for v in self.entries if v.kind == kind]

    def to_dict(self, net: Optional[NetGraph] = None) -> dict:
        def name(c):
            return net.name_of(c) if net is not None else int(c)

        return {
            "counts": self.by_kind(),
            "entries": [
                {"kind": v.kind, "participants": [name(c) for c in v.participants], "magnitude": v.magnitude}
                for v in self.entries
            ],
        }


def _cell_lists(layout: Layout, cids: np.ndarray):
    """Flattened (x, y, cid) triples covering every footprint cell."""
    size = layout.net.size[cids]
    counts = size[:, 0] * size[:, 1]
    owner = np.repeat(cids, counts)
    base = np.repeat(layout.cells[cids], counts, axis=0)
    w = np.repeat(size[:, 0], counts)
    start = np.repeat(np.cumsum(counts) - counts, counts)
    local = np.arange(owner.size) - start
    xs = base[:, 0] + local % w
    ys = base[:, 1] + local // w
    return xs, ys, owner


def qubit_gaps(cells_a, size_a, cells_b, size_b):
    """Signed per-axis free gaps between two rectangles (negative = projections overlap)."""
    gx = np.maximum(cells_b[..., 0] - (cells_a[..., 0] + size_a[..., 0]), cells_a[..., 0] - (cells_b[..., 0] + size_b[..., 0]))
    gy = np.maximum(cells_b[..., 1] - (cells_a[..., 1] + size_a[..., 1]), cells_a[..., 1] - (cells_b[..., 1] + size_b[..., 1]))
    return gx, gy


def validate(layout: Layout, min_qubit_spacing: int = 0) -> ViolationReport:
    """Report overlaps, border excursions and qubit-spacing shortfalls.

    Magnitudes: overlap in shared cells, border as the largest excursion
    beyond the substrate in cells, spacing as the missing number of cells.
    Unplaced components are ignored.
    """
    net = layout.net
    report = ViolationReport()
    cids = np.flatnonzero(layout.placed)
    if cids.size == 0:
        return report

    xs, ys, owner = _cell_lists(layout, cids)
    key = (ys + (1 << 20)) * (1 << 22) + (xs + (1 << 20))
    order = np.lexsort((owner, key))
    key, owner = key[order], owner[order]
    dup = np.flatnonzero(key[1:] == key[:-1])
    pair_area: Counter = Counter()
    if dup.size:
        starts = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
        ends = np.r_[starts[1:], key.size]
        multi = np.flatnonzero(ends - starts > 1)
        for g in multi:
            members = owner[starts[g]:ends[g]].tolist()
            for i in range(len(members)):
                for j in range(i + 1, len(members)):
                    if members[i] != members[j]:
                        pair_area[(members[i], members[j])] += 1
    for (a, b), area in sorted(pair_area.items()):
        report.entries.append(Violation("overlap", (a, b), float(area)))

    size = net.size[cids]
    lo = layout.cells[cids]
    excess = np.max(
        np.stack(
            [
                -lo[:, 0],
                -lo[:, 1],
                lo[:, 0] + size[:, 0] - layout.width,
                lo[:, 1] + size[:, 1] - layout.height,
                np.zeros(cids.size, dtype=np.int64),
            ]
        ),
        axis=0,
    )
    for cid, ex in zip(cids[excess > 0].tolist(), excess[excess > 0].tolist()):
        report.entries.append(Violation("border", (cid,), float(ex)))

    if min_qubit_spacing > 0:
        qs = cids[net.is_qubit[cids]]
        if qs.size > 1:
            i, j = np.triu_indices(qs.size, k=1)
            a, b = qs[i], qs[j]
            gx, gy = qubit_gaps(layout.cells[a], net.size[a], layout.cells[b], net.size[b])
            gap = np.maximum(gx, gy)
            bad = (gap >= 0) & (gap < min_qubit_spacing)
            for ca, cb, g in zip(a[bad].tolist(), b[bad].tolist(), gap[bad].tolist()):
                report.entries.append(Violation("qubit-spacing", (ca, cb), float(min_qubit_spacing - g)))
    return report
