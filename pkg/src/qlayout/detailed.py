"""Window-based detailed placement by maze re-routing of resonators.

For every flagged edge (split into several clusters, or touching a
near-resonant neighbour) a small window around it is cleared, the edge and
the neighbours that live wholly inside the window are re-routed
qubit-to-qubit, each path is padded back to the edge's block count, and
the change is kept only if the layout got better.  Qubits never move.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from .errors import PreconditionError, RouteFailure
from .layout import Layout, cluster_counts, validate
from .metrics import HotspotConfig, crossing_need, hotspot_proportion

logger = logging.getLogger(__name__)

Cell = Tuple[int, int]
Rect = Tuple[int, int, int, int]  # x0, y0, x1, y1 inclusive

_N4 = ((1, 0), (-1, 0), (0, 1), (0, -1))
_TOL = 1e-9


@dataclass
class DPConfig:
    max_passes: int = 3
    crossing_penalty: float = 10.0
    hotspot_penalty: float = 0.5  # extra path cost next to a near-resonant foreign component
    margin: int = 1
    strict_accept: bool = False


@dataclass
class Window:
    rect: Rect
    target: int  # edge position
    neighbors: List[int]
    extracted: List[int] = field(default_factory=list)

    def contains(self, x: int, y: int) -> bool:
        x0, y0, x1, y1 = self.rect
        return x0 <= x <= x1 and y0 <= y <= y1


@dataclass
class RouteResult:
    paths: Dict[int, List[Cell]] = field(default_factory=dict)
    owned: Dict[int, List[Cell]] = field(default_factory=dict)  # path cells kept plus meander cells
    crossings: int = 0
    success: bool = True


# -- violations and windows -------------------------------------------------


def find_violations(layout: Layout, hotspot: Optional[HotspotConfig] = None, check: bool = True) -> List[Tuple[int, str]]:
    """Edges (positions) that are split or sit in a hotspot, worst first."""
    if check and validate(layout):
        raise PreconditionError("detailed placement needs a legal layout")
    counts = cluster_counts(layout)
    h = hotspot_proportion(layout, hotspot).per_edge
    flagged = [k for k in range(layout.net.n_edges) if counts[k] > 1 or h[k] > 0]
    flagged.sort(key=lambda k: (-(counts[k] - 1), -h[k], layout.net.edges[k].id))
    return [(k, "multi-cluster" if counts[k] > 1 else "hotspot") for k in flagged]


def _perimeter(layout: Layout, cid: int) -> List[Cell]:
    """Cells 4-adjacent to a component's footprint, inside the substrate."""
    x, y = (int(v) for v in layout.cells[cid])
    w, h = (int(v) for v in layout.net.size[cid])
    ring = [(x + i, y - 1) for i in range(w)] + [(x + i, y + h) for i in range(w)]
    ring += [(x - 1, y + j) for j in range(h)] + [(x + w, y + j) for j in range(h)]
    return [c for c in ring if 0 <= c[0] < layout.width and 0 <= c[1] < layout.height]


def build_window(layout: Layout, edge_pos: int, margin: int = 1) -> Window:
    """Bounding box of the edge's blocks and its qubits' perimeters, plus margin."""
    net = layout.net
    edge = net.edges[edge_pos]
    pts = [tuple(layout.cells[b]) for b in edge.blocks]
    for q in net.endpoints[edge_pos]:
        x, y = layout.cells[q]
        w, h = net.size[q]
        pts += [(x - 1, y - 1), (x + w, y + h)]
    xs = [int(p[0]) for p in pts]
    ys = [int(p[1]) for p in pts]
    rect = (
        max(min(xs) - margin, 0),
        max(min(ys) - margin, 0),
        min(max(xs) + margin, layout.width - 1),
        min(max(ys) + margin, layout.height - 1),
    )
    x0, y0, x1, y1 = rect
    sub = layout.owner[y0:y1 + 1, x0:x1 + 1]
    ids = np.unique(sub[sub >= net.nq])
    neighbors = sorted(set(int(k) for k in net.edge_of[ids]) - {edge_pos})
    return Window(rect, edge_pos, neighbors)


def _extractable(layout: Layout, window: Window, edge_pos: int) -> bool:
    net = layout.net
    if not all(window.contains(*layout.cells[b]) for b in net.edges[edge_pos].blocks):
        return False
    return all(any(window.contains(*c) for c in _perimeter(layout, q)) for q in net.endpoints[edge_pos])


# -- routing ----------------------------------------------------------------


class _Grid:
    """Routing state for one window: blocked cells and cells routed so far."""

    def __init__(self, layout: Layout, window: Window, hotspot: HotspotConfig):
        self.layout = layout
        self.window = window
        self.hotspot = hotspot
        self.routed: Dict[Cell, int] = {}  # cell -> edge position owning it
        self.path_of: Dict[Cell, int] = {}

    def blocked(self, c: Cell) -> bool:
        return not self.window.contains(*c) or not self.layout.is_free(*c)

    def hot(self, c: Cell, edge_pos: int) -> bool:
        net = self.layout.net
        f = net.edges[edge_pos].freq
        for dx, dy in _N4:
            nb = (c[0] + dx, c[1] + dy)
            other = self.routed.get(nb)
            if other is not None:
                if other != edge_pos and abs(net.edges[other].freq - f) < self.hotspot.detune_threshold:
                    return True
                continue
            for o in self.layout.occupants(*nb):
                if net.edge_of[o] != edge_pos and abs(net.freq[o] - f) < self.hotspot.detune_threshold:
                    return True
        return False

    def attachment(self, q: int, target: np.ndarray) -> Optional[Cell]:
        best = None
        for c in _perimeter(self.layout, q):
            if self.blocked(c) or c in self.routed:
                continue
            key = ((c[0] - target[0]) ** 2 + (c[1] - target[1]) ** 2, c[1], c[0])
            if best is None or key < best[0]:
                best = (key, c)
        return None if best is None else best[1]


def _shortest_path(grid: _Grid, src: Cell, dst: Cell, edge_pos: int, cfg: DPConfig) -> Optional[List[Cell]]:
    """Dijkstra over window cells; routed cells cost extra, hot cells a little extra."""
    def cost(c):
        k = 1.0
        if c in grid.routed:
            k += cfg.crossing_penalty
        if cfg.hotspot_penalty and grid.hot(c, edge_pos):
            k += cfg.hotspot_penalty
        return k

    dist = {src: cost(src)}
    parent: Dict[Cell, Cell] = {}
    heap = [(dist[src], src[1], src[0])]
    while heap:
        d, y, x = heapq.heappop(heap)
        c = (x, y)
        if d > dist[c]:
            continue
        if c == dst:
            path = [c]
            while c in parent:
                c = parent[c]
                path.append(c)
            return path[::-1]
        for dx, dy in _N4:
            nb = (x + dx, y + dy)
            if grid.blocked(nb):
                continue
            nd = d + cost(nb)
            if nd < dist.get(nb, float("inf")):
                dist[nb] = nd
                parent[nb] = c
                heapq.heappush(heap, (nd, nb[1], nb[0]))
    return None


def _pad(grid: _Grid, owned: List[Cell], n: int, centroid: np.ndarray, edge_pos: int) -> List[Cell]:
    """Grow ``owned`` to ``n`` cells through free neighbouring cells (meander)."""
    have = set(owned)
    out = list(owned)
    heap: list = []
    seen: Set[Cell] = set()

    def push(c):
        for dx, dy in _N4:
            nb = (c[0] + dx, c[1] + dy)
            if nb in seen or nb in have or grid.blocked(nb) or nb in grid.routed:
                continue
            seen.add(nb)
            d = (nb[0] - centroid[0]) ** 2 + (nb[1] - centroid[1]) ** 2
            heapq.heappush(heap, (grid.hot(nb, edge_pos), d, nb[1], nb[0]))

    for c in out:
        push(c)
    while len(out) < n:
        if not heap:
            raise RouteFailure(f"no room to pad edge {grid.layout.net.edges[edge_pos].id} to {n} cells")
        _, _, y, x = heapq.heappop(heap)
        c = (x, y)
        have.add(c)
        out.append(c)
        push(c)
    return out


def maze_route(
    layout: Layout,
    window: Window,
    edges: Sequence[int],
    cfg: Optional[DPConfig] = None,
    hotspot: Optional[HotspotConfig] = None,
    centroids: Optional[Dict[int, np.ndarray]] = None,
) -> RouteResult:
    """Route ``edges`` (positions, blocks already lifted) inside ``window``.

    Edges go shortest first (ties by id).  Each path joins the attachment
    cells of its two qubits; cells already claimed by an earlier edge in
    the window may be crossed at ``crossing_penalty``.  Crossed cells stay
    with their first owner; the rest of the path plus meander cells make
    up exactly the edge's block count.  Raises :class:`RouteFailure`.
    """
    cfg = cfg or DPConfig()
    hotspot = hotspot or HotspotConfig()
    net = layout.net
    grid = _Grid(layout, window, hotspot)
    result = RouteResult()
    gp = layout.gp_lower_left()
    for k in sorted(edges, key=lambda k: (net.edges[k].n_blocks, net.edges[k].id)):
        edge = net.edges[k]
        n = edge.n_blocks
        target = gp[edge.blocks].mean(axis=0)
        if np.isnan(target).any():  # no GP known: aim at the current blocks
            target = layout.cells[edge.blocks].mean(axis=0)
        q1, q2 = net.endpoints[k]
        a = grid.attachment(q1, target)
        b = grid.attachment(q2, target)
        if a is None or b is None:
            raise RouteFailure(f"edge {edge.id}: no free attachment cell in window")
        path = _shortest_path(grid, a, b, k, cfg)
        if path is None:
            raise RouteFailure(f"edge {edge.id}: no path in window")
        crossed = [c for c in path if c in grid.routed]
        kept = [c for c in path if c not in grid.routed]
        if len(kept) > n:
            raise RouteFailure(f"edge {edge.id}: path needs {len(kept)} cells, only {n} reserved")
        centre = centroids[k] if centroids is not None and k in centroids else target
        owned = _pad(grid, kept, n, centre, k)
        for c in owned:
            grid.routed[c] = k
        result.paths[k] = path
        result.owned[k] = owned
        result.crossings += len(crossed)
    return result


# -- acceptance -------------------------------------------------------------


@dataclass
class _State:
    clusters: np.ndarray
    need: np.ndarray  # crossing need per edge position
    hot_total: float
    hot_edges: np.ndarray
    hot_qubits: int

    @property
    def unified(self) -> int:
        return int((self.clusters == 1).sum())


def _state(layout: Layout, hotspot: HotspotConfig, prev: Optional[_State] = None, touched: Sequence[int] = ()) -> _State:
    h = hotspot_proportion(layout, hotspot)
    if prev is None:
        clusters = cluster_counts(layout)
        need = np.array([crossing_need(layout, k).count for k in range(layout.net.n_edges)], dtype=np.int64)
    else:
        clusters = prev.clusters.copy()
        need = prev.need.copy()
        touched = sorted(set(touched))
        clusters[touched] = cluster_counts(layout, touched)
        for k in touched:
            need[k] = crossing_need(layout, k).count
    return _State(clusters, need, h.numerator, h.per_edge, h.qubits)


def _affected(layout: Layout, rect: Rect, extracted: Sequence[int]) -> List[int]:
    """Edges whose crossing search box can overlap ``rect``."""
    x0, y0, x1, y1 = rect
    out = set(extracted)
    net = layout.net
    for k, edge in enumerate(net.edges):
        c = layout.cells[edge.blocks]
        if c[:, 0].min() - 2 <= x1 and c[:, 0].max() + 2 >= x0 and c[:, 1].min() - 2 <= y1 and c[:, 1].max() + 2 >= y0:
            out.add(k)
    return sorted(out)


def _improved(before: _State, after: _State, strict: bool) -> bool:
    dc = int(after.clusters.sum()) - int(before.clusters.sum())
    scale = max(abs(before.hot_total), 1.0)
    dh = (after.hot_total - before.hot_total) / scale
    guards = (
        int(after.need.sum()) <= int(before.need.sum())
        and after.unified >= before.unified
        and after.hot_qubits <= before.hot_qubits
    )
    if not guards:
        return False
    if strict:
        return dc < 0 and dh < -_TOL
    return (dc < 0 and dh <= _TOL) or (dh < -_TOL and dc <= 0)


@dataclass
class DPResult:
    accepted: int
    log: List[dict]


def detailed_place(
    layout: Layout,
    cfg: Optional[DPConfig] = None,
    hotspot: Optional[HotspotConfig] = None,
) -> DPResult:
    """Improve clusters and hotspots window by window; mutates ``layout``."""
    cfg = cfg or DPConfig()
    hotspot = hotspot or HotspotConfig()
    net = layout.net
    if validate(layout):
        raise PreconditionError("detailed placement needs a legal layout")
    log: List[dict] = []
    accepted = 0
    state = _state(layout, hotspot)
    for pass_no in range(cfg.max_passes):
        changed = False
        for k, reason in find_violations(layout, hotspot, check=False):
            if state.clusters[k] <= 1 and state.hot_edges[k] <= 0:
                continue  # fixed by an earlier window this pass
            win = build_window(layout, k, cfg.margin)
            win.extracted = [k] + [j for j in win.neighbors if _extractable(layout, win, j)]
            saved = {b: tuple(int(v) for v in layout.cells[b]) for j in win.extracted for b in net.edges[j].blocks}
            centroids = {j: layout.cells[net.edges[j].blocks].mean(axis=0) for j in win.extracted}
            entry = {
                "edge": net.edges[k].id,
                "pass": pass_no,
                "reason": reason,
                "window_rect": list(win.rect),
                "clusters_before": int(state.clusters[k]),
                "hotspot_before": float(state.hot_edges[k]),
            }
            affected = _affected(layout, win.rect, win.extracted)
            for b in saved:
                layout.remove(b)
            try:
                routes = maze_route(layout, win, win.extracted, cfg, hotspot, centroids)
            except RouteFailure as exc:
                for b, (x, y) in saved.items():
                    layout.place(b, x, y)
                entry.update(accepted=False, crossings=None, error=str(exc),
                             clusters_after=entry["clusters_before"], hotspot_after=entry["hotspot_before"])
                log.append(entry)
                logger.debug("edge %d: %s", net.edges[k].id, exc)
                continue
            for j, cells in routes.owned.items():
                for b, (x, y) in zip(net.edges[j].blocks, cells):
                    layout.place(b, x, y)
            new_state = _state(layout, hotspot, state, affected)
            ok = _improved(state, new_state, cfg.strict_accept)
            entry.update(
                accepted=ok,
                crossings=routes.crossings,
                clusters_after=int(new_state.clusters[k]),
                hotspot_after=float(new_state.hot_edges[k]),
            )
            if ok:
                state = new_state
                accepted += 1
                changed = True
            else:
                for b in saved:
                    layout.remove(b)
                for b, (x, y) in saved.items():
                    layout.place(b, x, y)
                entry.update(clusters_after=entry["clusters_before"], hotspot_after=entry["hotspot_before"])
            log.append(entry)
        if not changed:
            break
    logger.debug("detailed placement accepted %d windows", accepted)
    return DPResult(accepted, log)
