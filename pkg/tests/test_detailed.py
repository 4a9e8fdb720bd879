import itertools

import numpy as np
import pytest

from qlayout.config import Config
from qlayout.detailed import DPConfig, Window, build_window, detailed_place, find_violations, maze_route
from qlayout.errors import PreconditionError, RouteFailure
from qlayout.gp import synthetic_gp
from qlayout.layout import FREE, Layout, cluster_counts, validate
from qlayout.metrics import count_crossings, hotspot_proportion
from qlayout.pipeline import run_pipeline
from qlayout.topology import gen_topology, preset

from conftest import make_net
from oracles import all_simple_paths, bfs_path_length


def corridor_layout(split=True):
    """Two qubits on a 12x6 substrate joined by a 6-block edge."""
    net = make_net(2, [(0, 1, 6, 6.0)], substrate=(12, 6))
    lay = Layout(net)
    lay.place(0, 0, 0)
    lay.place(1, 8, 0)
    cells = [(2, 0), (3, 0), (4, 0), (6, 0), (7, 0), (7, 1)] if split else [(2, 0), (3, 0), (4, 0), (5, 0), (6, 0), (7, 0)]
    for b, c in zip(net.edges[0].blocks, cells):
        lay.place(b, *c)
    return lay


def plus_layout(spare=True):
    """Four qubits around a plus-shaped corridor, everything else walled off.

    Edge 0 joins left and right qubits, edge 1 bottom and top; both have 5
    blocks, so they must share the centre cell.  One spare cell at (3, 3)
    leaves room to pad edge 1 back to its block count.
    """
    corridor = {(x, 4) for x in range(2, 7)} | {(4, y) for y in range(2, 7)}
    if spare:
        corridor.add((3, 3))
    qubits = {(0, 4): 0, (7, 4): 1, (4, 0): 2, (4, 7): 3}
    taken = set()
    for (x, y) in qubits:
        taken |= {(x + i, y + j) for i in (0, 1) for j in (0, 1)}
    wall = [(x, y) for y in range(9) for x in range(9) if (x, y) not in corridor and (x, y) not in taken]
    net = make_net(4, [(0, 1, 5, 6.0), (2, 3, 5, 6.5), (0, 2, len(wall), 7.0)], substrate=(9, 9))
    lay = Layout(net)
    for (x, y), q in qubits.items():
        lay.place(q, x, y)
    for b, c in zip(net.edges[2].blocks, wall):
        lay.place(b, *c)
    return lay, corridor


def free_mask(lay):
    return lay.owner == FREE


class TestViolations:
    def test_clean_layout_has_none(self):
        assert find_violations(corridor_layout(split=False)) == []

    def test_split_edge_flagged(self):
        assert find_violations(corridor_layout()) == [(0, "multi-cluster")]

    def test_hotspot_flagged(self):
        net = make_net(2, [(0, 1, 2, 5.02)], substrate=(10, 10))
        lay = Layout(net)
        lay.place(0, 0, 0)
        lay.place(1, 2, 4)
        lay.place(2, 2, 0)
        lay.place(3, 2, 1)
        assert find_violations(lay) == [(0, "hotspot")]

    def test_illegal_layout_rejected(self):
        lay = corridor_layout()
        lay.place(2, 0, 0)  # onto q0
        with pytest.raises(PreconditionError):
            find_violations(lay)
        with pytest.raises(PreconditionError):
            detailed_place(lay)


class TestWindow:
    def test_isolated_edge_clipped_at_corner(self):
        lay = corridor_layout(split=False)
        w = build_window(lay, 0, margin=1)
        # qubit rings reach x=-1..10, y=-1..2; margin and clipping give this
        assert w.rect == (0, 0, 11, 3)
        assert w.neighbors == []

    def test_abutting_neighbor_listed(self):
        net = make_net(2, [(0, 1, 6, 6.0), (0, 1, 1, 6.5)], substrate=(12, 8))
        lay = Layout(net)
        lay.place(0, 0, 0)
        lay.place(1, 8, 0)
        for k, b in enumerate(net.edges[0].blocks):
            lay.place(b, 2 + k, 0)
        lay.place(net.edges[1].blocks[0], 4, 1)
        w = build_window(lay, 0)
        assert w.neighbors == [1]
        far = build_window(lay, 0, margin=0)
        lay.place(net.edges[1].blocks[0], 4, 6)
        assert build_window(lay, 0, margin=0).neighbors == []
        assert far.rect == (0, 0, 10, 2)

    def test_contains(self):
        w = Window((1, 1, 3, 4), 0, [])
        assert w.contains(1, 1) and w.contains(3, 4)
        assert not w.contains(0, 1) and not w.contains(3, 5)


class TestMazeRoute:
    def test_straight_corridor(self):
        lay = corridor_layout()
        for b in lay.net.edges[0].blocks:
            lay.remove(b)
        win = build_window(lay, 0)
        res = maze_route(lay, win, [0])
        assert res.paths[0] == [(2, 0), (3, 0), (4, 0), (5, 0), (6, 0), (7, 0)]
        assert sorted(res.owned[0]) == sorted(res.paths[0])
        assert res.crossings == 0

    def test_detour_matches_bfs(self, rng):
        checked = 0
        for _ in range(40):
            net = make_net(2, [(0, 1, 60, 6.0), (0, 1, 20, 9.0)], substrate=(10, 10))
            lay = Layout(net)
            lay.place(0, 0, 0)
            lay.place(1, 8, 8)
            spots = [(x, y) for y in range(10) for x in range(10) if not (x < 2 and y < 2) and not (x > 7 and y > 7)]
            walls = rng.choice(len(spots), 20, replace=False)
            for b, k in zip(net.edges[1].blocks, walls):
                lay.place(b, *spots[k])
            win = Window((0, 0, 9, 9), 0, [])
            try:
                res = maze_route(lay, win, [0], DPConfig(hotspot_penalty=0.0))
            except RouteFailure:
                continue
            path = res.paths[0]
            assert len(path) == bfs_path_length(free_mask(lay), path[0], path[-1])
            assert all(abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1 for a, b in zip(path, path[1:]))
            assert len(set(res.owned[0])) == 60
            checked += 1
        assert checked >= 20

    def test_forced_crossing_matches_exhaustive(self):
        lay, _ = plus_layout()
        win = Window((0, 0, 8, 8), 0, [])
        res = maze_route(lay, win, [0, 1], centroids={0: np.array([4.0, 4.0]), 1: np.array([4.0, 4.0])})
        assert res.crossings == 1
        free = free_mask(lay)
        a = all_simple_paths(free, res.paths[0][0], res.paths[0][-1], 9)
        b = all_simple_paths(free, res.paths[1][0], res.paths[1][-1], 9)
        best = min(len(set(p) & set(q)) for p, q in itertools.product(a, b))
        assert best == res.crossings
        assert sorted(res.owned[1]) == [(3, 3), (4, 2), (4, 3), (4, 5), (4, 6)]
        assert count_crossings(res.paths) == 1

    def test_no_room_fails(self):
        lay, _ = plus_layout(spare=False)
        with pytest.raises(RouteFailure):
            maze_route(lay, Window((0, 0, 8, 8), 0, []), [0, 1])

    def test_too_short_fails(self):
        net = make_net(2, [(0, 1, 3, 6.0)], substrate=(12, 6))
        lay = Layout(net)
        lay.place(0, 0, 0)
        lay.place(1, 8, 0)
        with pytest.raises(RouteFailure):
            maze_route(lay, Window((0, 0, 11, 5), 0, []), [0])


def snapshot(lay):
    return lay.cells.tobytes(), lay.placed.tobytes(), lay.owner.tobytes()


class TestDetailedPlace:
    def test_fixpoint_on_clean_layout(self):
        lay = corridor_layout(split=False)
        before = snapshot(lay)
        res = detailed_place(lay)
        assert res.accepted == 0 and res.log == []
        assert snapshot(lay) == before

    def test_corridor_repair(self):
        lay = corridor_layout()
        res = detailed_place(lay)
        assert res.accepted == 1
        assert cluster_counts(lay).tolist() == [1]
        assert not validate(lay)
        entry = res.log[0]
        assert entry["accepted"] and entry["clusters_before"] == 2 and entry["clusters_after"] == 1

    def test_failed_route_reverts_exactly(self):
        # a foreign wall across the gap column leaves no path in the window
        net = make_net(2, [(0, 1, 6, 6.0), (0, 1, 4, 9.0)], substrate=(12, 6))
        lay = Layout(net)
        lay.place(0, 0, 0)
        lay.place(1, 8, 0)
        for b, c in zip(net.edges[0].blocks, [(2, 0), (3, 0), (4, 0), (6, 0), (7, 0), (7, 1)]):
            lay.place(b, *c)
        for b, y in zip(net.edges[1].blocks, range(4)):
            lay.place(b, 5, y)
        before = snapshot(lay)
        res = detailed_place(lay, DPConfig(margin=0))
        assert res.accepted == 0
        assert snapshot(lay) == before
        assert any(not e["accepted"] for e in res.log)

    def test_strict_accept_needs_both(self):
        lay = corridor_layout()
        before = snapshot(lay)
        res = detailed_place(lay, DPConfig(strict_accept=True))
        # no hotspot to reduce, so the strict rule keeps the split edge
        assert res.accepted == 0 and snapshot(lay) == before


def legalized(name, seed, engine="qgdp"):
    cfg = Config(run_dp=False)
    net = gen_topology(preset(name, seed=seed))
    gp = synthetic_gp(net, seed=seed)
    lay, _ = run_pipeline(gp, engine, cfg, programs=[], run_dp=False)
    return lay


@pytest.mark.parametrize("name,seed,engine", [
    ("grid", 0, "qgdp"), ("falcon", 1, "qgdp"), ("grid", 2, "tetris"), ("xtree", 3, "abacus"), ("aspen-11", 4, "q-tetris"),
])
def test_dp_properties(name, seed, engine):
    lay = legalized(name, seed, engine)
    net = lay.net
    clusters = int(cluster_counts(lay).sum())
    hot = hotspot_proportion(lay)
    crossings = count_crossings(lay)
    qubits = lay.cells[: net.nq].copy()
    detailed_place(lay, DPConfig(max_passes=20))
    assert not validate(lay)
    assert np.array_equal(qubits, lay.cells[: net.nq])
    assert lay.placed.all()
    for edge in net.edges:
        cells = {tuple(lay.cells[b]) for b in edge.blocks}
        assert len(cells) == edge.n_blocks
    assert int(cluster_counts(lay).sum()) <= clusters
    after = hotspot_proportion(lay)
    assert after.numerator <= hot.numerator * (1 + 1e-9)
    assert after.qubits <= hot.qubits
    assert count_crossings(lay) <= crossings
    # already at a fixpoint: a second run changes nothing
    before = snapshot(lay)
    assert detailed_place(lay, DPConfig(max_passes=20)).accepted == 0
    assert snapshot(lay) == before
