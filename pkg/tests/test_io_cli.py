import json
import re

import numpy as np
import pytest

from qlayout.bench import bench, write_report
from qlayout.cli import main
from qlayout.config import Config, load_config
from qlayout.errors import CapacityError, InvalidArgumentError
from qlayout.fileio import (
    load_netlist,
    load_placement,
    netlist_from_dict,
    netlist_to_dict,
    placement_from_dict,
    placement_to_dict,
    save_netlist,
    save_placement,
)
from qlayout.gp import sample_programs, size_substrate, synthetic_gp
from qlayout.layout import Layout, validate
from qlayout.netlist import resonator_length_um
from qlayout.pipeline import ENGINES, run_pipeline
from qlayout.render import render_svg
from qlayout.topology import gen_topology, preset

from conftest import make_net

COUNTS = {
    "grid": (25, 40),
    "falcon": (27, 28),
    "eagle": (127, 144),
    "aspen-11": (40, 48),
    "aspen-m": (80, 106),
    "xtree": (53, 52),
}


class TestTopology:
    @pytest.mark.parametrize("name", sorted(COUNTS))
    def test_counts(self, name):
        net = gen_topology(preset(name))
        assert (net.nq, net.n_edges) == COUNTS[name]

    @pytest.mark.parametrize("name", sorted(COUNTS))
    def test_frequencies_in_band(self, name):
        net = gen_topology(preset(name, seed=3))
        qf = np.array([q.freq for q in net.qubits])
        ef = np.array([e.freq for e in net.edges])
        assert qf.min() >= 4.8 and qf.max() <= 5.2
        assert ef.min() >= 6.0 and ef.max() <= 7.0
        for e in net.edges:
            assert net.qubits[e.q1].freq != net.qubits[e.q2].freq
            assert e.length_um == pytest.approx(resonator_length_um(e.freq))

    def test_unknown_preset(self):
        with pytest.raises(InvalidArgumentError):
            preset("sycamore")

    def test_seeded(self):
        a = netlist_to_dict(gen_topology(preset("falcon", seed=5)))
        b = netlist_to_dict(gen_topology(preset("falcon", seed=5)))
        assert a == b


class TestSyntheticGP:
    def test_noise_free_is_exact(self):
        net = gen_topology(preset("grid"))
        gp = synthetic_gp(net, noise=0.0)
        a = synthetic_gp(net, noise=0.0, seed=99)
        assert np.array_equal(gp.gp, a.gp)
        # qubits sit on a scaled copy of the lattice
        xs = sorted(set(np.round(gp.gp[: net.nq, 0], 6)))
        assert len(xs) == 5
        assert np.allclose(np.diff(xs), xs[1] - xs[0])

    def test_deterministic(self):
        net = gen_topology(preset("eagle"))
        a = synthetic_gp(net, seed=7).gp
        b = synthetic_gp(net, seed=7).gp
        c = synthetic_gp(net, seed=8).gp
        assert np.array_equal(a, b) and not np.array_equal(a, c)

    def test_heavy_noise_overlaps(self):
        net = gen_topology(preset("grid"))
        lay = synthetic_gp(net, noise=2.0, seed=1)
        lay.place_from_gp()
        assert validate(lay).by_kind().get("overlap", 0) > 0

    def test_substrate_holds_lattice_and_area(self):
        net = gen_topology(preset("falcon"))
        w, h = size_substrate(net)
        assert w == h
        assert (w / net.pitch) ** 2 >= 1.8 * net.footprint_area()

    def test_too_small_substrate(self):
        net = gen_topology(preset("grid"))
        with pytest.raises(CapacityError):
            synthetic_gp(net, substrate_um=(3000.0, 3000.0))

    def test_negative_noise(self):
        with pytest.raises(InvalidArgumentError):
            synthetic_gp(gen_topology(preset("grid")), noise=-1)

    def test_programs_connected(self):
        net = gen_topology(preset("falcon"))
        for prog in sample_programs(net, 5, 20, seed=2):
            assert len(prog.active_qubits) == 5
            for eid in prog.active_edges:
                e = net.edges[eid]
                assert e.q1 in prog.active_qubits and e.q2 in prog.active_qubits


def legal_grid():
    net = gen_topology(preset("grid", seed=1))
    gp = synthetic_gp(net, seed=1)
    lay, reports = run_pipeline(gp, "qgdp", Config(), programs=[])
    return gp, lay, reports


class TestFiles:
    def test_netlist_round_trip_bytes(self, tmp_path):
        net = gen_topology(preset("aspen-11"))
        size = size_substrate(net)
        net.set_substrate(size)
        save_netlist(net, tmp_path / "a.json")
        save_netlist(load_netlist(tmp_path / "a.json"), tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_placement_round_trip_bytes(self, tmp_path):
        gp, lay, _ = legal_grid()
        for stage, obj in (("gp", gp), ("lg", lay)):
            save_placement(obj, tmp_path / "a.json", stage, {"k": 1})
            back, st, meta = load_placement(lay.net, tmp_path / "a.json")
            assert st == stage and meta == {"k": 1}
            save_placement(back, tmp_path / "b.json", stage, meta)
            assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
        back, _, _ = load_placement(lay.net, tmp_path / "a.json")
        assert np.array_equal(back.cells, lay.cells)

    def test_misaligned_rejected(self):
        net = make_net(2, substrate=(10, 10))
        data = {"format_version": 1, "stage": "lg", "positions": {"q0": [310.0, 300.0]}}
        with pytest.raises(InvalidArgumentError):
            placement_from_dict(net, data)

    def test_unknown_name_rejected(self):
        net = make_net(2, substrate=(10, 10))
        with pytest.raises(InvalidArgumentError):
            placement_from_dict(net, {"format_version": 1, "stage": "lg", "positions": {"q9": [300.0, 300.0]}})

    def test_bad_version(self, tmp_path):
        p = tmp_path / "n.json"
        p.write_text(json.dumps({"format_version": 99}))
        with pytest.raises(InvalidArgumentError):
            load_netlist(p)

    def test_malformed_netlist(self):
        with pytest.raises(InvalidArgumentError):
            netlist_from_dict({"qubits": []})

    def test_unplaced_components_omitted(self):
        net = make_net(2, substrate=(10, 10))
        lay = Layout(net)
        lay.place(0, 0, 0)
        assert list(placement_to_dict(lay, "lg")["positions"]) == ["q0"]


class TestRender:
    def test_element_counts(self, tmp_path):
        _, lay, _ = legal_grid()
        svg = render_svg(lay, tmp_path / "x.svg")
        assert (tmp_path / "x.svg").read_text() == svg
        assert svg.count('class="qubit"') == lay.net.nq
        assert svg.count('class="block"') == lay.net.n - lay.net.nq
        assert svg.count('class="border"') == 1
        assert "violation" not in svg

    def test_violation_markers(self):
        net = make_net(2, [(0, 1, 1, 6.0)], substrate=(10, 10))
        lay = Layout(net)
        lay.place(0, 0, 0)
        lay.place(1, 1, 1)
        lay.place(2, 9, 9)
        rep = validate(lay)
        svg = render_svg(lay, violations=rep)
        assert svg.count('class="violation"') == len(rep.entries) > 0


class TestPipeline:
    @pytest.mark.parametrize("engine", sorted(ENGINES))
    def test_every_engine_is_legal(self, engine):
        net = gen_topology(preset("falcon", seed=2))
        gp = synthetic_gp(net, seed=2)
        before = gp.gp.copy()
        lay, reports = run_pipeline(gp, engine, Config(), programs=[])
        assert not validate(lay)
        assert np.array_equal(gp.gp, before) and not gp.placed.any()
        assert set(reports) == {"qubit-lg", "resonator-lg", "dp"}
        if engine not in ("tetris", "abacus"):
            assert lay.meta["qubit_spacing_cells"] >= 1
            assert not validate(lay, min_qubit_spacing=lay.meta["qubit_spacing_cells"])

    def test_unknown_engine(self):
        gp = synthetic_gp(gen_topology(preset("grid")))
        with pytest.raises(InvalidArgumentError):
            run_pipeline(gp, "magic")

    def test_no_dp(self):
        gp = synthetic_gp(gen_topology(preset("grid")))
        _, reports = run_pipeline(gp, "qgdp", Config(run_dp=False), programs=[])
        assert "dp" not in reports


class TestBench:
    def test_rows_and_determinism(self, tmp_path):
        cfg = Config(program_samples=3)
        a = bench(["grid", "falcon"], ["qgdp", "tetris"], [0, 1], cfg)
        b = bench(["grid", "falcon"], ["qgdp", "tetris"], [0, 1], cfg)
        assert len(a.rows) == 4
        assert a.row("falcon", "tetris").failures == 0
        assert a.to_csv(runtime=False) == b.to_csv(runtime=False)
        md = a.to_markdown()
        assert md.count("\n") == 2 + 4
        csv_path, md_path = write_report(a, tmp_path)
        assert csv_path.read_text() == a.to_csv()
        with pytest.raises(KeyError):
            a.row("eagle", "qgdp")

    def test_bad_arguments(self):
        with pytest.raises(InvalidArgumentError):
            bench([], ["qgdp"], [0])
        with pytest.raises(InvalidArgumentError):
            bench(["grid"], ["magic"], [0])


class TestConfig:
    def test_round_trip(self, tmp_path):
        cfg = Config()
        cfg.error_model.eg_convention = "complement"
        p = tmp_path / "c.json"
        p.write_text(json.dumps(cfg.to_dict()))
        assert load_config(p) == cfg

    def test_partial_override(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"hotspot": {"detune_threshold": 0.2}, "run_dp": False}))
        cfg = load_config(p)
        assert cfg.hotspot.detune_threshold == 0.2 and not cfg.run_dp
        assert cfg.geometry.pitch_um == 300.0

    @pytest.mark.parametrize("data", [{"nope": 1}, {"dp": {"nope": 1}}, {"dp": 3}])
    def test_unknown_keys(self, tmp_path, data):
        p = tmp_path / "c.json"
        p.write_text(json.dumps(data))
        with pytest.raises(InvalidArgumentError):
            load_config(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InvalidArgumentError):
            load_config(tmp_path / "none.json")


class TestCLI:
    def test_full_flow(self, tmp_path, capsys):
        out = str(tmp_path)
        assert main(["gen", "grid", "--out", out, "--seed", "1"]) == 0
        net = tmp_path / "grid.netlist.json"
        assert main(["gp", str(net), "--out", out, "--seed", "1"]) == 0
        assert main(["legalize", str(net), str(tmp_path / "gp.json"), "--engine", "qgdp", "--out", out]) == 0
        lg = tmp_path / "placement_qgdp.json"
        assert main(["dp", str(net), str(lg), "--gp", str(tmp_path / "gp.json"), "--out", out]) == 0
        dp = tmp_path / "placement_dp.json"
        capsys.readouterr()
        assert main(["metrics", str(net), str(dp), "--out", out]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["violations"] == {}
        assert report["I_edge"][1] == 40
        assert main(["render", str(net), str(dp), "--out", out, "--violations"]) == 0
        assert (tmp_path / "layout.svg").exists()
        assert json.loads((tmp_path / "dp_log.json").read_text()) is not None

    def test_global_flags_before_subcommand(self, tmp_path):
        assert main(["--out", str(tmp_path), "--seed", "4", "gen", "falcon"]) == 0
        assert (tmp_path / "falcon.netlist.json").exists()
        assert load_netlist(tmp_path / "falcon.netlist.json") is not None

    def test_bench(self, tmp_path, capsys):
        assert main(["bench", "--topologies", "grid", "--engines", "qgdp", "--seeds", "1", "--out", str(tmp_path)]) == 0
        assert re.search(r"\| grid \| qgdp \|", capsys.readouterr().out)
        assert (tmp_path / "bench.csv").exists() and (tmp_path / "bench.md").exists()

    def test_invalid_input_exit_2(self, tmp_path):
        assert main(["gp", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2
        bad = tmp_path / "c.json"
        bad.write_text("{")
        assert main(["--config", str(bad), "gen", "grid", "--out", str(tmp_path)]) == 2

    def test_unknown_topology_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["gen", "sycamore"])
        assert exc.value.code == 2

    def test_capacity_exit_3(self, tmp_path):
        main(["gen", "grid", "--out", str(tmp_path)])
        net = load_netlist(tmp_path / "grid.netlist.json")
        net.set_substrate((3000.0, 3000.0))
        save_netlist(net, tmp_path / "grid.netlist.json")
        assert main(["gp", str(tmp_path / "grid.netlist.json"), "--out", str(tmp_path)]) == 3
