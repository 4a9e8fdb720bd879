"""Compare the five legalization engines across topologies.

The integration-aware engine keeps each resonator's blocks together; the
row-based engines scatter them.  The table reports means over a few seeds
with runtimes, and a CSV copy is written next to it.

    python3 demos/02_engine_comparison.py --seeds 3
"""

import argparse
from pathlib import Path

from qlayout import Config
from qlayout.bench import bench, write_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--topologies", nargs="+", default=["grid", "falcon", "aspen-11", "xtree"])
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--no-dp", action="store_true", help="report legalization output only")
    ap.add_argument("--out", default="demo_out")
    args = ap.parse_args()

    cfg = Config(run_dp=not args.no_dp, program_samples=10)
    report = bench(args.topologies, ["qgdp", "q-tetris", "q-abacus", "tetris", "abacus"], list(range(args.seeds)), cfg)
    print(f"metrics after stage: {report.stage}\n")
    print(report.to_markdown())
    csv_path, _ = write_report(report, Path(args.out), stem="engines")
    print(f"CSV: {csv_path}")


if __name__ == "__main__":
    main()
