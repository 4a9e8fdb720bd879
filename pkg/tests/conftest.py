import numpy as np
import pytest

from qlayout.layout import Layout
from qlayout.netlist import NetGraph, Qubit, ResonatorEdge


def make_net(n_qubits=2, edges=(), substrate=(10, 10), pitch=300.0, qubit_cells=2):
    """Small hand-built netlist; ``edges`` holds (q1, q2, n_blocks, freq)."""
    qubits = [Qubit(i, 5.0 + 0.05 * i, (qubit_cells * pitch - 100, qubit_cells * pitch - 100)) for i in range(n_qubits)]
    res = []
    for k, (a, b, n, f) in enumerate(edges):
        # pad * length == n * pitch^2 exactly
        res.append(ResonatorEdge(k, a, b, f, n * pitch * pitch / 100.0, 100.0))
    return NetGraph(qubits, res, pitch, (substrate[0] * pitch, substrate[1] * pitch))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def blank_layout(net):
    return Layout(net)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
