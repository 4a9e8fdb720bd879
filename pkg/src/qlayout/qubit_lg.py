"""Qubit legalization with horizontal/vertical constraint graphs.

Qubits are treated as macros.  Every qubit pair is ordered along one axis
(the one where its GP gap, normalised by the required separation, is
larger), which makes the two graphs acyclic and guarantees non-overlap plus
the requested spacing once every arc holds.  Each axis is then solved
exactly for minimum total L1 displacement over integer cells.

The per-axis solver works on the min-cost-flow dual of the tension problem
(``networkx.network_simplex`` with integer data), then reads the smallest
optimal coordinates off the residual network.  Because the optimum set of a
separable convex objective under difference constraints is closed under
componentwise minimum, that choice is also the lexicographically smallest
optimum.
"""

from __future__ import annotations

import logging
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .errors import CapacityError, InfeasibleError, InvariantError, PreconditionError
from .layout import Layout

logger = logging.getLogger(__name__)

SOURCE = -1
SINK = -2
# GP coordinates enter the objective quantised to 1/GP_QUANTUM of a cell
GP_QUANTUM = 1000


@dataclass
class ConstraintGraph:
    """Difference constraints along one axis.

    An arc ``(u, v, w)`` means ``center(v) - center(u) >= w`` in cells.
    ``SOURCE``/``SINK`` stand for the substrate borders at 0 and ``extent``.
    """

    axis: str  # "h" or "v"
    nodes: List[int]
    sizes: Dict[int, int]
    arcs: List[Tuple[int, int, float]] = field(default_factory=list)
    extent: Optional[int] = None

    def pair_arcs(self) -> List[Tuple[int, int, float]]:
        return [a for a in self.arcs if a[0] >= 0 and a[1] >= 0]

    def lower_left_arcs(self) -> List[Tuple[int, int, int]]:
        """Arcs rewritten as ``ll(v) - ll(u) >= w`` between lower-left corners."""
        out = []
        for u, v, w in self.arcs:
            su = self.sizes.get(u, 0)
            sv = self.sizes.get(v, 0)
            out.append((u, v, int(round(w + su / 2 - sv / 2))))
        return out


@dataclass
class SpacingPolicy:
    initial: int = 2
    floor: int = 1
    step: int = 1

    def __post_init__(self):
        if not (self.initial >= self.floor >= 0) or self.step < 1:
            raise ValueError(f"invalid spacing policy {self}")

    def levels(self):
        s = self.initial
        while s >= self.floor:
            yield s
            s -= self.step


def _prune(order: List[int], arcs: Dict[Tuple[int, int], float]) -> Dict[Tuple[int, int], float]:
    """Drop arcs implied by a path through another node (weights are longest-path)."""
    m = len(order)
    if m < 3 or not arcs:
        return arcs
    pos = {n: k for k, n in enumerate(order)}
    A = np.full((m, m), -np.inf)
    for (u, v), w in arcs.items():
        A[pos[u], pos[v]] = w
    L = np.full((m, m), -np.inf)
    for u in range(m - 1, -1, -1):
        row = A[u]
        L[u] = np.maximum(row, (row[:, None] + L).max(axis=0))
    kept = {}
    for (u, v), w in arcs.items():
        i, j = pos[u], pos[v]
        via = (L[i, i + 1:j] + L[i + 1:j, j]).max(initial=-np.inf)
        if via < w:
            kept[(u, v)] = w
    return kept


def build_constraint_graphs(
    ids: Sequence[int],
    centers: np.ndarray,
    sizes: np.ndarray,
    spacing: int,
    extents: Tuple[Optional[int], Optional[int]] = (None, None),
    prune: bool = True,
) -> Tuple[ConstraintGraph, ConstraintGraph]:
    """Horizontal and vertical constraint graphs for qubits at GP centres (cells)."""
    ids = [int(i) for i in ids]
    centers = np.asarray(centers, dtype=float).reshape(-1, 2)
    sizes = np.asarray(sizes).reshape(-1, 2)
    hsizes = {c: int(sizes[k, 0]) for k, c in enumerate(ids)}
    vsizes = {c: int(sizes[k, 1]) for k, c in enumerate(ids)}
    harcs: Dict[Tuple[int, int], float] = {}
    varcs: Dict[Tuple[int, int], float] = {}
    m = len(ids)
    if m > 1:
        i, j = np.triu_indices(m, k=1)
        d = centers[j] - centers[i]
        req_x = (sizes[i, 0] + sizes[j, 0]) / 2.0 + spacing
        req_y = (sizes[i, 1] + sizes[j, 1]) / 2.0 + spacing
        horizontal = np.abs(d[:, 0]) / req_x >= np.abs(d[:, 1]) / req_y
        for a, b, dx, dy, hz, rx, ry in zip(
            i.tolist(), j.tolist(), d[:, 0].tolist(), d[:, 1].tolist(),
            horizontal.tolist(), req_x.tolist(), req_y.tolist(),
        ):
            delta = dx if hz else dy
            # orient along ascending GP coordinate, ties by ascending id
            forward = delta > 0 or (delta == 0 and ids[a] < ids[b])
            u, v = (ids[a], ids[b]) if forward else (ids[b], ids[a])
            (harcs if hz else varcs)[(u, v)] = rx if hz else ry
    graphs = []
    for axis, arcs, sz, ext in (("h", harcs, hsizes, extents[0]), ("v", varcs, vsizes, extents[1])):
        col = 0 if axis == "h" else 1
        order = [ids[k] for k in np.lexsort((np.array(ids), centers[:, col]))] if m else []
        if prune:
            arcs = _prune(order, arcs)
        arc_list = [(SOURCE, c, sz[c] / 2.0) for c in ids]
        arc_list += [(u, v, w) for (u, v), w in sorted(arcs.items())]
        arc_list += [(c, SINK, sz[c] / 2.0) for c in ids]
        graphs.append(ConstraintGraph(axis, list(ids), sz, arc_list, ext))
    return graphs[0], graphs[1]


def longest_path(graph: ConstraintGraph) -> Tuple[float, List[int]]:
    """Longest SOURCE->SINK path (weight, node list) of an acyclic graph."""
    nodes = [SOURCE] + list(graph.nodes) + [SINK]
    succ = defaultdict(list)
    indeg = {n: 0 for n in nodes}
    for u, v, w in graph.arcs:
        succ[u].append((v, w))
        indeg[v] = indeg.get(v, 0) + 1
        indeg.setdefault(u, 0)
    queue = deque(n for n in indeg if indeg[n] == 0)
    dist = {n: -np.inf for n in indeg}
    dist[SOURCE] = 0.0
    parent: Dict[int, int] = {}
    seen = 0
    while queue:
        u = queue.popleft()
        seen += 1
        for v, w in succ[u]:
            if dist[u] + w > dist[v]:
                dist[v] = dist[u] + w
                parent[v] = u
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    if seen != len(indeg):
        raise InvariantError(f"{graph.axis}-constraint graph has a cycle")
    if dist.get(SINK, -np.inf) == -np.inf:
        return 0.0, []
    path = [SINK]
    while path[-1] != SOURCE:
        path.append(parent[path[-1]])
    return float(dist[SINK]), path[::-1]


def feasible(graph: ConstraintGraph, extent: Optional[int] = None) -> bool:
    """True iff the longest border-to-border chain fits in ``extent`` cells."""
    extent = graph.extent if extent is None else extent
    length, _ = longest_path(graph)
    return length <= extent + 1e-9


def _nearest_int(G: int, lo: int, hi: int) -> int:
    # G is in 1/GP_QUANTUM cells; ties go to the smaller integer
    p = G // GP_QUANTUM
    x = p if G - GP_QUANTUM * p <= GP_QUANTUM * (p + 1) - G else p + 1
    return min(max(x, lo), hi)


def _solve_component(
    nodes: List[int],
    G: Dict[int, int],
    lo: Dict[int, int],
    hi: Dict[int, int],
    arcs: List[Tuple[int, int, int]],
) -> Dict[int, int]:
    """Exact integer min sum |K x_i - G_i| under x_v - x_u >= w, lo <= x <= hi."""
    K = GP_QUANTUM
    root = "r"
    net = nx.MultiDiGraph()
    net.add_node(root, demand=-K * len(nodes))
    residual: List[Tuple[object, object, int]] = []
    flow_arcs = []  # (tail, head, capacity or None, cost)
    for c in nodes:
        net.add_node(c, demand=K)
        p = G[c] // K
        frac = G[c] - K * p
        flow_arcs.append((root, c, 2 * K - 2 * frac, p))
        if frac:
            flow_arcs.append((root, c, 2 * frac, p + 1))
        flow_arcs.append((c, root, None, -lo[c]))
        flow_arcs.append((root, c, None, hi[c]))
    for u, v, w in arcs:
        flow_arcs.append((v, u, None, -w))
    keys = []
    for t, h, cap, cost in flow_arcs:
        attrs = {"weight": cost}
        if cap is not None:
            attrs["capacity"] = cap
        keys.append(net.add_edge(t, h, **attrs))
    _, flow = nx.network_simplex(net)
    for (t, h, cap, cost), key in zip(flow_arcs, keys):
        f = flow[t][h][key]
        if cap is None or f < cap:
            residual.append((t, h, cost))
        if f > 0:
            residual.append((h, t, -cost))
    # smallest optimal potentials: x_v = -dist(v -> root) in the residual network
    into = defaultdict(list)
    for t, h, cost in residual:
        into[h].append((t, cost))
    dist = {root: 0}
    queue = deque([root])
    queued = {root}
    relax = 0
    limit = (len(nodes) + 1) * (len(residual) + 1)
    while queue:
        h = queue.popleft()
        queued.discard(h)
        for t, cost in into[h]:
            d = dist[h] + cost
            if d < dist.get(t, float("inf")):
                dist[t] = d
                relax += 1
                if relax > limit:
                    raise InvariantError("negative cycle in residual network")
                if t not in queued:
                    queued.add(t)
                    queue.append(t)
    return {c: -dist[c] for c in nodes}


def solve_axis(graph: ConstraintGraph, gp_coords: Dict[int, float], extent: Optional[int] = None) -> Dict[int, int]:
    """Integer lower-left coordinates minimising total L1 displacement.

    ``gp_coords`` maps node -> continuous lower-left GP coordinate (cells).
    Raises :class:`InfeasibleError` with the offending chain if the graph
    does not fit in ``extent``.
    """
    extent = graph.extent if extent is None else extent
    if extent is None:
        raise PreconditionError("solve_axis needs an extent")
    length, path = longest_path(graph)
    if length > extent + 1e-9:
        raise InfeasibleError(
            f"{graph.axis}-axis chain of {length:g} cells exceeds extent {extent}",
            path=path, length=length, extent=extent,
        )
    ll_arcs = graph.lower_left_arcs()
    lo = {c: 0 for c in graph.nodes}
    hi = {c: extent - graph.sizes[c] for c in graph.nodes}
    G = {c: int(round(gp_coords[c] * GP_QUANTUM)) for c in graph.nodes}

    # weakly connected components over pair arcs solve independently
    parent = {c: c for c in graph.nodes}

    def find(c):
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    pair = [(u, v, w) for u, v, w in ll_arcs if u >= 0 and v >= 0]
    for u, v, _ in pair:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    groups: Dict[int, List[int]] = defaultdict(list)
    for c in graph.nodes:
        groups[find(c)].append(c)
    arcs_by_group: Dict[int, List[Tuple[int, int, int]]] = defaultdict(list)
    for u, v, w in pair:
        arcs_by_group[find(u)].append((u, v, w))

    out: Dict[int, int] = {}
    for rep, members in groups.items():
        if len(members) == 1:
            c = members[0]
            out[c] = _nearest_int(G[c], lo[c], hi[c])
        else:
            out.update(_solve_component(members, G, lo, hi, arcs_by_group[rep]))
    for u, v, w in pair:
        if out[v] - out[u] < w:
            raise InvariantError(f"solver broke arc {u}->{v} ({out[v] - out[u]} < {w})")
    return out


@dataclass
class QubitLGResult:
    positions: Dict[int, Tuple[int, int]]
    spacing: int
    displacement: float
    graphs: Tuple[ConstraintGraph, ConstraintGraph]


def legalize_qubits(layout: Layout, policy: Optional[SpacingPolicy] = None) -> QubitLGResult:
    """Place every qubit on cells, relaxing the spacing from ``initial`` toward ``floor``.

    The first spacing for which both constraint graphs fit is used.  Qubits
    end up placed and fixed; ``layout.meta['qubit_spacing_cells']`` records
    the achieved spacing.
    """
    policy = policy or SpacingPolicy()
    net = layout.net
    ids = list(range(net.nq))
    if np.isnan(layout.gp[:net.nq]).any():
        raise PreconditionError("every qubit needs a GP position")
    centers = layout.gp[:net.nq] / layout.pitch
    sizes = net.size[:net.nq]
    ll = layout.gp_lower_left()[:net.nq]
    W, H = layout.width, layout.height
    last = None
    for s in policy.levels():
        hcg, vcg = build_constraint_graphs(ids, centers, sizes, s, extents=(W, H))
        lh, ph = longest_path(hcg)
        lv, pv = longest_path(vcg)
        if lh <= W and lv <= H:
            xs = solve_axis(hcg, {c: ll[c, 0] for c in ids})
            ys = solve_axis(vcg, {c: ll[c, 1] for c in ids})
            for c in ids:
                layout.place(c, xs[c], ys[c])
                layout.fixed[c] = True
            layout.meta["qubit_spacing_cells"] = s
            disp = float(np.abs(layout.cells[:net.nq] - ll).sum())
            logger.debug("qubits legalized at spacing %d, displacement %.2f cells", s, disp)
            return QubitLGResult({c: (xs[c], ys[c]) for c in ids}, s, disp, (hcg, vcg))
        logger.debug("spacing %d infeasible (h %.1f/%d, v %.1f/%d)", s, lh, W, lv, H)
        last = (lh, lv, ph if lh > W else pv)
    lh, lv, path = last
    raise CapacityError(
        f"qubits do not fit even at spacing {policy.floor}: need {lh:g}x{lv:g} cells, have {W}x{H}",
        required=(lh, lv), available=(W, H),
    )
