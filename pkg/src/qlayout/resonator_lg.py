"""Wire-block legalizers: integration-aware, Tetris and Abacus.

All three run after the qubits are fixed and fill free cells only, so
their output is overlap-free and inside the substrate by construction.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .bins import BinIndex, nearest_in
from .errors import CapacityError, EmptyIndexError, PreconditionError
from .layout import Layout

logger = logging.getLogger(__name__)

_N4 = ((1, 0), (-1, 0), (0, 1), (0, -1))


@dataclass
class PlacementStep:
    block: int
    cell: Tuple[int, int]
    frontier_size: int  # |B_aa| before the placement; 0 means the index fallback was used


@dataclass
class BlockLGResult:
    placed: int
    trace: List[PlacementStep] = field(default_factory=list)


def _prepare(layout: Layout) -> Tuple[BinIndex, np.ndarray]:
    net = layout.net
    blocks = np.arange(net.nq, net.n)
    if not layout.placed[:net.nq].all():
        raise PreconditionError("qubits must be legalized before the wire blocks")
    if np.isnan(layout.gp[blocks]).any():
        raise PreconditionError("every wire block needs a GP position")
    for b in blocks[layout.placed[blocks]]:
        layout.remove(int(b))
    index = BinIndex.from_layout(layout)
    if len(index) < blocks.size:
        raise CapacityError(
            f"{blocks.size} blocks but only {len(index)} free cells",
            required=int(blocks.size), available=len(index),
        )
    return index, layout.gp_lower_left()


def default_edge_order(layout: Layout) -> List[int]:
    """Edge positions by descending block count, ties by edge id."""
    net = layout.net
    return sorted(range(net.n_edges), key=lambda k: (-net.edges[k].n_blocks, net.edges[k].id))


def legalize_resonators(
    layout: Layout,
    order: Optional[Sequence[int]] = None,
    record_trace: bool = False,
) -> BlockLGResult:
    """Integration-aware block legalization.

    Edges are handled one at a time (``order`` lists edge positions).  The
    first block of an edge goes to the free cell nearest its GP position;
    each later block goes to the nearest cell of the edge's adjacency
    frontier (free cells touching blocks already placed for this edge),
    falling back to the global index only when the frontier is empty.
    """
    net = layout.net
    index, ll = _prepare(layout)
    order = default_edge_order(layout) if order is None else list(order)
    result = BlockLGResult(0)
    for k in order:
        edge = net.edges[k]
        frontier: set = set()
        for b in edge.blocks:
            px, py = ll[b]
            size = len(frontier)
            try:
                cell = nearest_in(frontier, px, py) if frontier else index.nearest(px, py)
            except EmptyIndexError as exc:
                raise CapacityError(f"ran out of free cells while placing edge {edge.id}", edge=edge.id) from exc
            x, y = cell
            layout.place(b, x, y)
            index.remove(x, y)
            frontier.discard(cell)
            for dx, dy in _N4:
                nb = (x + dx, y + dy)
                if index.contains(*nb):
                    frontier.add(nb)
            result.placed += 1
            if record_trace:
                result.trace.append(PlacementStep(int(b), cell, size))
    return result


def tetris_legalize(layout: Layout) -> BlockLGResult:
    """Blocks in ascending GP x (ties by id), each to its nearest free cell."""
    net = layout.net
    index, ll = _prepare(layout)
    blocks = np.arange(net.nq, net.n)
    order = blocks[np.lexsort((blocks, ll[blocks, 0]))]
    result = BlockLGResult(0)
    for b in order.tolist():
        try:
            x, y = index.nearest(*ll[b])
        except EmptyIndexError as exc:
            raise CapacityError("ran out of free cells", edge=int(net.edge_of[b])) from exc
        layout.place(b, x, y)
        index.remove(x, y)
        result.placed += 1
    return result


def _round(v: float) -> int:
    # nearest integer, ties toward the smaller one
    return math.ceil(v - 0.5)


class _Segment:
    """A free run of one row holding Abacus clusters of unit-width cells."""

    __slots__ = ("y", "lo", "hi", "cells", "clusters")

    def __init__(self, y, lo, hi):
        self.y, self.lo, self.hi = y, lo, hi
        self.cells: List[int] = []
        # each cluster: [x, count, q] where q = sum(g_i - offset_i)
        self.clusters: List[List[float]] = []

    def full(self) -> bool:
        return len(self.cells) >= self.hi - self.lo

    def _collapse(self, e, q, upto):
        x = min(max(_round(q / e), self.lo), self.hi - e)
        k = upto
        while k >= 0:
            px, pe, pq = self.clusters[k]
            if px + pe <= x:
                break
            q = pq + q - pe * e
            e = pe + e
            x = min(max(_round(q / e), self.lo), self.hi - e)
            k -= 1
        return x, e, q, k

    def trial(self, g: float) -> int:
        """x the new cell would get if appended now."""
        x, e, _, _ = self._collapse(1, g, len(self.clusters) - 1)
        return x + e - 1

    def append(self, cid: int, g: float):
        x, e, q, k = self._collapse(1, g, len(self.clusters) - 1)
        del self.clusters[k + 1:]
        self.clusters.append([x, e, q])
        self.cells.append(cid)

    def positions(self):
        out = []
        i = 0
        for x, e, _ in self.clusters:
            for j in range(int(e)):
                out.append((self.cells[i], int(x) + j))
                i += 1
        return out


def abacus_legalize(layout: Layout) -> BlockLGResult:
    """Row-based Abacus placement minimising quadratic displacement per row."""
    net = layout.net
    index, ll = _prepare(layout)
    rows: List[List[_Segment]] = [
        [_Segment(y, a, b) for a, b in index.intervals(y)] for y in range(layout.height)
    ]
    blocks = np.arange(net.nq, net.n)
    order = blocks[np.lexsort((blocks, ll[blocks, 0]))]
    for b in order.tolist():
        gx, gy = float(ll[b, 0]), float(ll[b, 1])
        best = None  # (cost, y, seg)
        y0 = min(max(_round(gy), 0), layout.height - 1)
        up, down = y0, y0 - 1
        while up < layout.height or down >= 0:
            du = abs(up - gy) if up < layout.height else math.inf
            dd = abs(down - gy) if down >= 0 else math.inf
            if dd <= du:
                y, dy = down, dd
                down -= 1
            else:
                y, dy = up, du
                up += 1
            if best is not None and dy * dy > best[0]:
                break
            for seg in rows[y]:
                if seg.full():
                    continue
                # cheap lower bound on horizontal cost before the trial
                gap = max(seg.lo - gx, gx - (seg.hi - 1), 0.0)
                if best is not None and gap * gap + dy * dy > best[0]:
                    continue
                x = seg.trial(gx)
                cost = (x - gx) ** 2 + dy * dy
                if best is None or (cost, y, seg.lo) < (best[0], best[1], best[2].lo):
                    best = (cost, y, seg)
        if best is None:
            raise CapacityError("ran out of row capacity", edge=int(net.edge_of[b]))
        best[2].append(b, gx)
    placed = 0
    for segs in rows:
        for seg in segs:
            for cid, x in seg.positions():
                layout.place(cid, x, seg.y)
                placed += 1
    return BlockLGResult(placed)


ENGINES = {
    "qgdp": legalize_resonators,
    "tetris": tetris_legalize,
    "abacus": abacus_legalize,
}
