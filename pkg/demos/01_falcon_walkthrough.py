"""Walk one 27-qubit heavy-hex chip through every stage.

Generates the netlist, jitters a synthetic global placement, legalizes
qubits then resonator blocks, repairs with detailed placement, and writes
an SVG per stage so the effect of each step can be seen.

    python3 demos/01_falcon_walkthrough.py --out demo_out
"""

import argparse
import logging
from pathlib import Path

from qlayout import (
    Config,
    gen_topology,
    legalize_qubits,
    legalize_resonators,
    metrics_report,
    preset,
    render_svg,
    synthetic_gp,
    validate,
)
from qlayout.detailed import detailed_place, find_violations
from qlayout.qubit_lg import SpacingPolicy


def show(stage, layout):
    m = metrics_report(layout)
    unified, total = m["I_edge"]
    print(f"{stage:<14} sum|C|={m['sum_clusters']:4d}  unified {unified}/{total}  X={m['X']:3d}  P_h={m['P_h_percent']:.3f}%  H_Q={m['H_Q']}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="demo_out")
    ap.add_argument("--seed", type=int, default=4)
    args = ap.parse_args()
    logging.basicConfig(level=logging.WARNING)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = Config()

    net = gen_topology(preset("falcon", seed=args.seed))
    gp = synthetic_gp(net, seed=args.seed)
    print(f"{net.name}: {net.nq} qubits, {net.n_edges} resonators, {net.n} movable cells, substrate {net.grid_shape}")

    # Snap the raw GP to the grid: overlaps everywhere
    raw = gp.copy()
    raw.place_from_gp()
    print(f"snapped GP has {len(validate(raw))} violations")
    render_svg(raw, out / "falcon_0_gp.svg", validate(raw))

    layout = gp.copy()
    q = legalize_qubits(layout, SpacingPolicy(2, 1))
    print(f"qubits legal at spacing {q.spacing} cell(s), total displacement {q.displacement:.1f} cells")

    legalize_resonators(layout)
    assert not validate(layout)
    show("after LG", layout)
    render_svg(layout, out / "falcon_1_lg.svg")

    flagged = find_violations(layout, cfg.hotspot)
    print(f"detailed placement starts with {len(flagged)} flagged resonators")
    dp = detailed_place(layout, cfg.dp, cfg.hotspot)
    show("after DP", layout)
    print(f"{dp.accepted} windows accepted out of {len(dp.log)} tried")
    render_svg(layout, out / "falcon_2_dp.svg")
    print(f"SVGs written to {out}/")


if __name__ == "__main__":
    main()
