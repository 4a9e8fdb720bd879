"""Explore the crosstalk error model behind the fidelity estimate.

Prints the pair error as detuning and exposure time vary, under the
literal convention and its complement, then shows how program fidelity
on a layout with hotspots and crossings depends on that choice, before
and after detailed placement removes them.
"""

import math

import numpy as np

from qlayout import Config, ErrorModelConfig, gen_topology, preset, run_pipeline, sample_programs, synthetic_gp
from qlayout.metrics import crosstalk_pair_error, effective_coupling, program_fidelity


def main():
    literal = ErrorModelConfig()
    complement = ErrorModelConfig(eg_convention="complement")
    c_par = literal.c_cross
    print(f"one crossing (C_par = {c_par} fF): g = {effective_coupling(0.0, c_par, literal):.3f} rad/us at resonance")
    print(f"{'detuning GHz':>13} {'g_eff rad/us':>13} {'literal':>9} {'complement':>11}")
    for delta in (0.0, 0.01, 0.05, 0.1, 0.5, 1.0):
        g = effective_coupling(delta, c_par, literal)
        print(f"{delta:13.2f} {g:13.4f} {crosstalk_pair_error(delta, literal.t_gate, c_par, literal):9.4f} "
              f"{crosstalk_pair_error(delta, literal.t_gate, c_par, complement):11.4f}")

    g = effective_coupling(0.0, c_par, literal)
    period = math.pi / g * 1e3
    print(f"\nat resonance the error repeats every {period:.0f} ns:")
    for t in np.linspace(0, period, 5):
        print(f"  t={t:7.1f} ns  literal={crosstalk_pair_error(0.0, t, c_par, literal):.3f}")

    net = gen_topology(preset("falcon", seed=2))
    gp = synthetic_gp(net, seed=2)
    programs = sample_programs(net, 5, 20, seed=2)
    lg, _ = run_pipeline(gp, "tetris", Config(run_dp=False), programs=[])
    dp, _ = run_pipeline(gp, "tetris", Config(), programs=[])
    print(f"\nmean program fidelity over {len(programs)} five-qubit programs on a tetris falcon layout")
    for stage, layout in (("LG", lg), ("DP", dp)):
        for cfg in (literal, complement):
            res = [program_fidelity(layout, p, cfg) for p in programs]
            terms = sum(len(r.eps_e) + len(r.eps_g) for r in res)
            print(f"  {stage} {cfg.eg_convention:>13}: {np.mean([r.fidelity for r in res]):.4f} ({terms} crosstalk terms)")

if __name__ == "__main__":
    main()
