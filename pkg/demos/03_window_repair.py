"""Repair one split resonator with a detailed-placement window.

A six-block resonator is left in two pieces with a gap between them.
The window around it is cleared, the resonator is re-routed between its
qubits, padded back to six blocks, and kept because the cluster count
dropped without adding hotspots or crossings.
"""

import json

from qlayout import Layout, NetGraph, Qubit, ResonatorEdge, cluster_counts
from qlayout.detailed import build_window, detailed_place


def picture(layout):
    rows = []
    for y in reversed(range(layout.height)):
        row = ""
        for x in range(layout.width):
            occ = layout.occupants(x, y)
            row += "." if not occ else ("Q" if layout.net.is_qubit[occ[0]] else "#")
        rows.append(row)
    return "\n".join(rows)


def main():
    pitch = 300.0
    qubits = [Qubit(0, 5.0, (500.0, 500.0)), Qubit(1, 5.1, (500.0, 500.0))]
    # pad * length = 6 cells of area
    edge = ResonatorEdge(0, 0, 1, 6.2, 6 * pitch * pitch / 100.0, 100.0)
    net = NetGraph(qubits, [edge], pitch, (12 * pitch, 5 * pitch))
    layout = Layout(net)
    layout.place(0, 0, 0)
    layout.place(1, 8, 0)
    for b, (x, y) in zip(net.edges[0].blocks, [(2, 0), (3, 0), (2, 1), (6, 0), (7, 0), (7, 1)]):
        layout.place(b, x, y)

    print("before: clusters per resonator", cluster_counts(layout).tolist())
    print(picture(layout))
    print("window", build_window(layout, 0).rect)

    result = detailed_place(layout)
    print("\nafter: clusters per resonator", cluster_counts(layout).tolist())
    print(picture(layout))
    print("\nlog:")
    print(json.dumps(result.log, indent=1))


if __name__ == "__main__":
    main()
