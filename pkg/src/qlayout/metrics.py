"""Layout quality metrics.

Cluster statistics, resonator crossings, frequency-hotspot proportion and a
worst-case program fidelity estimate.  Nothing here mutates a layout.
"""

from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from .errors import InvalidArgumentError, PreconditionError
from .layout import Layout, cluster_counts, compute_clusters, qubit_gaps

PAPER_LITERAL = "paper-literal"
COMPLEMENT = "complement"


@dataclass
class HotspotConfig:
    detune_threshold: float = 0.1  # GHz
    inverse_distance: bool = False

    def __post_init__(self):
        if not self.detune_threshold > 0:
            raise InvalidArgumentError("detune_threshold must be positive")


@dataclass
class ErrorModelConfig:
    """Crosstalk and decoherence constants.

    Only ``c_cross`` (3.5 fF per airbridge crossing) is a measured value; the
    rest are placeholders chosen to give fidelities in a sensible range.
    """

    t_gate: float = 300.0  # ns of crosstalk exposure
    kappa_g: float = 0.3  # MHz per fF
    c_cross: float = 3.5  # fF
    c_per_len: float = 0.05  # fF per um of shared boundary
    e1: float = 1e-3
    e2: float = 1e-2
    T1: float = 100.0  # us
    T2: float = 100.0  # us
    eg_convention: str = PAPER_LITERAL
    min_qubit_spacing: int = 1  # cells; closer qubit pairs count as violations

    def __post_init__(self):
        for name in ("t_gate", "kappa_g", "c_cross", "c_per_len", "e1", "e2", "T1", "T2"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"{name} must be positive")
        if self.eg_convention not in (PAPER_LITERAL, COMPLEMENT):
            raise InvalidArgumentError(f"unknown eg_convention {self.eg_convention!r}")


# -- adjacency and hotspots -------------------------------------------------


def touching_pairs(layout: Layout) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distinct touching component pairs (a < b) with shared boundary in cells.

    Blocks of the same edge are not reported.
    """
    own = layout.owner
    a = np.concatenate([own[:, :-1].ravel(), own[:-1, :].ravel()])
    b = np.concatenate([own[:, 1:].ravel(), own[1:, :].ravel()])
    keep = (a >= 0) & (b >= 0) & (a != b)
    a, b = a[keep], b[keep]
    ea, eb = layout.net.edge_of[a], layout.net.edge_of[b]
    keep = ~((ea >= 0) & (ea == eb))
    lo = np.minimum(a[keep], b[keep])
    hi = np.maximum(a[keep], b[keep])
    if lo.size == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty
    key = lo * layout.net.n + hi
    uniq, counts = np.unique(key, return_counts=True)
    return uniq // layout.net.n, uniq % layout.net.n, counts


@dataclass
class HotspotResult:
    proportion: float  # P_h as a fraction
    per_edge: np.ndarray  # H_e per edge position (um^2)
    qubits: int  # H_Q
    numerator: float
    pairs: List[Tuple[int, int, float]] = field(default_factory=list)

    @property
    def percent(self) -> float:
        return 100.0 * self.proportion


def hotspot_proportion(layout: Layout, cfg: Optional[HotspotConfig] = None) -> HotspotResult:
    """Frequency-hotspot proportion of a layout.

    Sums, over touching component pairs whose detuning is below the
    threshold, shared boundary length times centroid distance, and divides
    by the total component area.  A pair between blocks of two edges is
    split evenly between them in ``per_edge``; a qubit-block pair goes
    wholly to the block's edge.
    """
    cfg = cfg or HotspotConfig()
    net = layout.net
    a, b, shared = touching_pairs(layout)
    per_edge = np.zeros(net.n_edges)
    area = float(np.prod(net.size, axis=1).sum()) * layout.pitch ** 2
    if a.size == 0:
        return HotspotResult(0.0, per_edge, 0, 0.0)
    hot = np.abs(net.freq[a] - net.freq[b]) < cfg.detune_threshold
    a, b, shared = a[hot], b[hot], shared[hot]
    centers = layout.centers_um()
    d = np.hypot(*(centers[a] - centers[b]).T)
    length = shared * layout.pitch
    if cfg.inverse_distance:
        contrib = length * layout.pitch ** 2 / d
    else:
        contrib = length * d
    numerator = float(np.sum(np.sort(contrib)))
    ea, eb = net.edge_of[a], net.edge_of[b]
    both = (ea >= 0) & (eb >= 0)
    share = np.where(both, contrib / 2, contrib)
    np.add.at(per_edge, ea[ea >= 0], share[ea >= 0])
    np.add.at(per_edge, eb[eb >= 0], share[eb >= 0])
    qubits = set(a[net.is_qubit[a]].tolist()) | set(b[net.is_qubit[b]].tolist())
    pairs = list(zip(a.tolist(), b.tolist(), contrib.tolist()))
    return HotspotResult(numerator / area, per_edge, len(qubits), numerator, pairs)


# -- crossings --------------------------------------------------------------


@dataclass
class CrossingNeed:
    count: int
    crossed: List[int]  # component ids traversed (one entry per crossing)


def crossing_need(layout: Layout, edge_pos: int, margin: int = 2) -> CrossingNeed:
    """Fewest foreign cells to traverse to join all clusters of one edge.

    Clusters are joined greedily with a 0-1 BFS inside the edge's bounding
    box grown by ``margin`` cells; free and own cells are free to cross,
    any other occupied cell costs one crossing.  Cells already used by an
    earlier connection are free afterwards.
    """
    net = layout.net
    edge = net.edges[edge_pos]
    part = compute_clusters(layout, edge.id)
    if len(part) <= 1:
        return CrossingNeed(0, [])
    cells = layout.cells[edge.blocks]
    x0 = max(int(cells[:, 0].min()) - margin, 0)
    y0 = max(int(cells[:, 1].min()) - margin, 0)
    x1 = min(int(cells[:, 0].max()) + margin, layout.width - 1)
    y1 = min(int(cells[:, 1].max()) + margin, layout.height - 1)
    own = set(edge.blocks)
    label = {}
    for k, cl in enumerate(part.clusters):
        for blk in cl:
            label[(int(layout.cells[blk, 0]), int(layout.cells[blk, 1]))] = k
    tree = {c for c, k in label.items() if k == 0}
    joined = {0}
    total = 0
    crossed: List[int] = []
    while len(joined) < len(part):
        dist = {c: 0 for c in tree}
        parent: Dict[Tuple[int, int], Tuple[int, int]] = {}
        dq = deque(sorted(tree, key=lambda c: (c[1], c[0])))
        hit = None
        while dq:
            c = dq.popleft()
            k = label.get(c)
            if k is not None and k not in joined:
                hit = c
                break
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                nb = (c[0] + dx, c[1] + dy)
                if not (x0 <= nb[0] <= x1 and y0 <= nb[1] <= y1):
                    continue
                occ = layout.occupants(*nb)
                step = 0 if (not occ or nb in tree or all(o in own for o in occ)) else 1
                nd = dist[c] + step
                if nd < dist.get(nb, math.inf):
                    dist[nb] = nd
                    parent[nb] = c
                    if step:
                        dq.append(nb)
                    else:
                        dq.appendleft(nb)
        if hit is None:  # unreachable within the box: count each cluster as one crossing
            total += len(part) - len(joined)
            break
        total += dist[hit]
        k = label[hit]
        c = hit
        while c in parent:
            if c not in tree:
                occ = layout.occupants(*c)
                if occ and not all(o in own for o in occ):
                    crossed.append(occ[0])
            tree.add(c)
            c = parent[c]
        tree.update(cc for cc, kk in label.items() if kk == k)
        joined.add(k)
    return CrossingNeed(int(total), crossed)


def count_crossings(obj, edges: Optional[Iterable[int]] = None) -> int:
    """Resonator crossings X.

    For a :class:`Layout`: summed :func:`crossing_need` over non-unified
    edges.  For a mapping ``edge -> path cells`` (routed result): number of
    cells on the paths of two or more different edges.
    """
    if isinstance(obj, Layout):
        positions = range(obj.net.n_edges) if edges is None else edges
        return int(sum(crossing_need(obj, k).count for k in positions))
    owners: Dict[Tuple[int, int], Set[int]] = defaultdict(set)
    for e, path in obj.items():
        for c in path:
            owners[tuple(c)].add(e)
    return sum(1 for v in owners.values() if len(v) > 1)


# -- crosstalk error and fidelity -------------------------------------------


def pair_error_from_phase(phase: float, convention: str = PAPER_LITERAL) -> float:
    """Crosstalk error for a Rabi phase ``g_eff * t``."""
    p = math.sin(phase) ** 2
    return 1.0 - p if convention == PAPER_LITERAL else p


def effective_coupling(delta_ghz: float, c_par: float, cfg: ErrorModelConfig) -> float:
    """g_eff in rad/us: dispersive g^2/|delta|, capped at the bare coupling g."""
    g = 2 * math.pi * cfg.kappa_g * c_par  # rad/us
    delta = 2 * math.pi * abs(delta_ghz) * 1e3
    if delta == 0:
        return g
    return min(g, g * g / delta)


def crosstalk_pair_error(delta: float, t: float, c_par: float, cfg: Optional[ErrorModelConfig] = None) -> float:
    """Error of an idle pair detuned by ``delta`` GHz, exposed for ``t`` ns."""
    cfg = cfg or ErrorModelConfig()
    if t < 0:
        raise InvalidArgumentError("exposure time must be non-negative")
    phase = effective_coupling(delta, c_par, cfg) * t * 1e-3
    return min(max(pair_error_from_phase(phase, cfg.eg_convention), 0.0), 1.0)


@dataclass
class ProgramFootprint:
    active_qubits: Set[int]  # qubit ids
    active_edges: Set[int]  # edge ids
    gates1: Dict[int, int] = field(default_factory=dict)
    gates2: Dict[int, int] = field(default_factory=dict)
    duration: float = 1.0  # us

    def check(self, layout: Layout):
        net = layout.net
        for q in self.active_qubits:
            if q not in net.qubit_index:
                raise PreconditionError(f"unknown qubit {q} in program footprint")
        for e in self.active_edges:
            if e not in net.edge_index:
                raise PreconditionError(f"unknown edge {e} in program footprint")
            edge = net.edge(e)
            if edge.q1 not in self.active_qubits or edge.q2 not in self.active_qubits:
                raise PreconditionError(f"active edge {e} touches an inactive qubit")
        for d in (self.gates1, self.gates2):
            for q, n in d.items():
                if q not in net.qubit_index or n < 0:
                    raise PreconditionError(f"bad gate count {q}: {n}")
        if self.duration < 0:
            raise PreconditionError("negative duration")


@dataclass
class FidelityResult:
    fidelity: float
    eps_q: Dict[int, float]
    eps_g: List[Tuple[Tuple[int, int], float]]
    eps_e: List[Tuple[Tuple[int, int], float]]
    convention: str


def combine_fidelity(eps_q: Iterable[float], eps_g: Iterable[float], eps_e: Iterable[float]) -> float:
    f = 1.0
    for group in (eps_q, eps_g, eps_e):
        for e in group:
            f *= 1.0 - e
    return f


def qubit_error(g1: int, g2: int, duration: float, cfg: ErrorModelConfig) -> float:
    keep = (1 - cfg.e1) ** g1 * (1 - cfg.e2) ** g2 * math.exp(-duration / cfg.T1) * math.exp(-duration / cfg.T2)
    return 1.0 - keep


def _facing_length(layout: Layout, a: int, b: int, spacing: int) -> float:
    """Facing boundary length (um) of two qubits closer than ``spacing``, else 0."""
    net = layout.net
    ca, cb = layout.cells[a], layout.cells[b]
    sa, sb = net.size[a], net.size[b]
    gx, gy = qubit_gaps(ca, sa, cb, sb)
    if max(gx, gy) >= spacing:
        return 0.0
    # projection overlap on the axis orthogonal to the separating one
    ox = min(ca[0] + sa[0], cb[0] + sb[0]) - max(ca[0], cb[0])
    oy = min(ca[1] + sa[1], cb[1] + sb[1]) - max(ca[1], cb[1])
    if gx >= gy:
        return max(oy, 0) * layout.pitch
    return max(ox, 0) * layout.pitch


def program_fidelity(
    layout: Layout,
    program: ProgramFootprint,
    cfg: Optional[ErrorModelConfig] = None,
    hotspot: Optional[HotspotConfig] = None,
) -> FidelityResult:
    """Worst-case program fidelity: qubit, qubit-crosstalk and resonator terms."""
    cfg = cfg or ErrorModelConfig()
    hotspot = hotspot or HotspotConfig()
    program.check(layout)
    net = layout.net
    t = cfg.t_gate
    eps_q = {}
    for q in sorted(program.active_qubits):
        eps_q[q] = qubit_error(program.gates1.get(q, 0), program.gates2.get(q, 0), program.duration, cfg)

    eps_g = []
    active_cids = sorted(net.qubit_index[q] for q in program.active_qubits)
    for i, a in enumerate(active_cids):
        for b in active_cids[i + 1:]:
            length = _facing_length(layout, a, b, cfg.min_qubit_spacing)
            if length > 0:
                delta = net.freq[a] - net.freq[b]
                eps = crosstalk_pair_error(delta, t, cfg.c_per_len * length, cfg)
                eps_g.append(((net.qubits[a].id, net.qubits[b].id), eps))

    eps_e = []
    active_pos = {net.edge_index[e] for e in program.active_edges}
    if active_pos:
        a, b, shared = touching_pairs(layout)
        near = np.abs(net.freq[a] - net.freq[b]) < hotspot.detune_threshold
        agg: Dict[Tuple[int, int], float] = defaultdict(float)
        for ca, cb, s in zip(a[near].tolist(), b[near].tolist(), shared[near].tolist()):
            ea, eb = int(net.edge_of[ca]), int(net.edge_of[cb])
            if ea in active_pos or eb in active_pos:
                ka = ("e", ea) if ea >= 0 else ("q", ca)
                kb = ("e", eb) if eb >= 0 else ("q", cb)
                agg[tuple(sorted((ka, kb)))] += s * layout.pitch
        for (ka, kb), length in sorted(agg.items()):
            fa = net.edges[ka[1]].freq if ka[0] == "e" else net.freq[ka[1]]
            fb = net.edges[kb[1]].freq if kb[0] == "e" else net.freq[kb[1]]
            eps = crosstalk_pair_error(fa - fb, t, cfg.c_per_len * length, cfg)
            eps_e.append(((_label(net, ka), _label(net, kb)), eps))
        for k in sorted(active_pos):
            need = crossing_need(layout, k)
            for other in need.crossed:
                delta = net.edges[k].freq - net.freq[other]
                eps = crosstalk_pair_error(delta, t, cfg.c_cross, cfg)
                eps_e.append(((net.edges[k].id, net.name_of(other)), eps))

    f = combine_fidelity(eps_q.values(), (e for _, e in eps_g), (e for _, e in eps_e))
    return FidelityResult(f, eps_q, eps_g, eps_e, cfg.eg_convention)


def _label(net, key):
    kind, idx = key
    return f"e{net.edges[idx].id}" if kind == "e" else net.name_of(idx)


# -- displacement -----------------------------------------------------------


def displacement_stats(before, after) -> Tuple[float, float, float]:
    """(total, mean, max) L1 displacement in cells between two placements.

    Accepts mappings ``id -> (x, y)`` or equally shaped arrays.
    """
    if isinstance(before, Mapping) or isinstance(after, Mapping):
        if set(before) != set(after):
            raise PreconditionError("placements cover different components")
        keys = sorted(before)
        b = np.array([before[k] for k in keys], dtype=float).reshape(-1, 2)
        a = np.array([after[k] for k in keys], dtype=float).reshape(-1, 2)
    else:
        b = np.asarray(before, dtype=float)
        a = np.asarray(after, dtype=float)
        if a.shape != b.shape:
            raise PreconditionError("placements cover different components")
    if b.size == 0:
        return 0.0, 0.0, 0.0
    d = np.abs(a - b).sum(axis=1)
    return float(d.sum()), float(d.mean()), float(d.max())


# -- reports ----------------------------------------------------------------


@dataclass
class LayoutMetrics:
    sum_clusters: int
    unified: int
    total_edges: int
    crossings: int
    hotspot: HotspotResult

    @property
    def i_edge(self) -> float:
        return self.unified / self.total_edges if self.total_edges else 1.0


def layout_metrics(layout: Layout, hotspot: Optional[HotspotConfig] = None) -> LayoutMetrics:
    counts = cluster_counts(layout)
    return LayoutMetrics(
        int(counts.sum()),
        int((counts == 1).sum()),
        int(counts.size),
        count_crossings(layout, np.flatnonzero(counts > 1).tolist()),
        hotspot_proportion(layout, hotspot),
    )


def metrics_report(
    layout: Layout,
    hotspot: Optional[HotspotConfig] = None,
    errors: Optional[ErrorModelConfig] = None,
    programs: Sequence[ProgramFootprint] = (),
) -> dict:
    hotspot = hotspot or HotspotConfig()
    errors = errors or ErrorModelConfig()
    m = layout_metrics(layout, hotspot)
    fids = [program_fidelity(layout, p, errors, hotspot).fidelity for p in programs]
    return {
        "sum_clusters": m.sum_clusters,
        "I_edge": [m.unified, m.total_edges],
        "X": m.crossings,
        "P_h_percent": m.hotspot.percent,
        "H_Q": m.hotspot.qubits,
        "fidelity": float(np.mean(fids)) if fids else None,
        "config_echo": {"hotspot": asdict(hotspot), "error_model": asdict(errors)},
    }
