"""JSON netlist and placement files.

Both formats are written with sorted keys and a fixed indent so that
save -> load -> save reproduces the same bytes.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from .errors import InvalidArgumentError
from .layout import Layout
from .netlist import NetGraph, Qubit, ResonatorEdge

FORMAT_VERSION = 1

PathLike = Union[str, Path]


def _dump(obj, path: PathLike):
    text = json.dumps(obj, indent=1, sort_keys=True) + "\n"
    Path(path).write_text(text)


def _read(path: PathLike) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidArgumentError(f"cannot read {path}: {exc}") from exc
    if data.get("format_version") != FORMAT_VERSION:
        raise InvalidArgumentError(f"{path}: unsupported format_version {data.get('format_version')!r}")
    return data


def netlist_to_dict(net: NetGraph) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "name": net.name,
        "pitch_um": net.pitch,
        "substrate_um": list(net.substrate_um),
        "qubits": [
            {
                "id": q.id,
                "freq_ghz": q.freq,
                "size_um": list(q.size_um),
                **({"coord": list(q.coord)} if q.coord is not None else {}),
            }
            for q in net.qubits
        ],
        "edges": [
            {"id": e.id, "q1": e.q1, "q2": e.q2, "freq_ghz": e.freq, "length_um": e.length_um, "pad_um": e.pad_um}
            for e in net.edges
        ],
    }


def netlist_from_dict(data: dict) -> NetGraph:
    try:
        qubits = [
            Qubit(int(q["id"]), float(q["freq_ghz"]), tuple(q["size_um"]), tuple(q["coord"]) if "coord" in q else None)
            for q in data["qubits"]
        ]
        edges = [
            ResonatorEdge(int(e["id"]), int(e["q1"]), int(e["q2"]), float(e["freq_ghz"]), float(e["length_um"]), float(e["pad_um"]))
            for e in data["edges"]
        ]
        substrate = tuple(data.get("substrate_um", (0.0, 0.0)))
        return NetGraph(qubits, edges, float(data["pitch_um"]), substrate, data.get("name", ""))
    except (KeyError, TypeError) as exc:
        raise InvalidArgumentError(f"malformed netlist: {exc!r}") from exc


def save_netlist(net: NetGraph, path: PathLike):
    _dump(netlist_to_dict(net), path)


def load_netlist(path: PathLike) -> NetGraph:
    return netlist_from_dict(_read(path))


def placement_to_dict(layout: Layout, stage: str, metadata: Optional[dict] = None) -> dict:
    """Component centres in um; ``stage == 'gp'`` writes the GP positions."""
    net = layout.net
    if stage == "gp":
        pos = layout.gp
    else:
        pos = np.where(layout.placed[:, None], layout.centers_um(), np.nan)
    positions = {}
    for cid in range(net.n):
        if not np.isnan(pos[cid]).any():
            positions[net.name_of(cid)] = [float(pos[cid, 0]), float(pos[cid, 1])]
    return {
        "format_version": FORMAT_VERSION,
        "stage": stage,
        "positions": positions,
        "metadata": metadata or {},
    }


def placement_from_dict(net: NetGraph, data: dict) -> Tuple[Layout, str, dict]:
    stage = data.get("stage", "")
    layout = Layout(net)
    try:
        items = [(net.cid_of(name), xy) for name, xy in data["positions"].items()]
    except (KeyError, ValueError, IndexError) as exc:
        raise InvalidArgumentError(f"placement names an unknown component: {exc}") from exc
    for cid, (x, y) in items:
        if stage == "gp":
            layout.gp[cid] = (x, y)
            continue
        w, h = net.size[cid]
        lx, ly = x / net.pitch - w / 2.0, y / net.pitch - h / 2.0
        if abs(lx - round(lx)) > 1e-6 or abs(ly - round(ly)) > 1e-6:
            raise InvalidArgumentError(f"{net.name_of(cid)} is not aligned to the grid")
        layout.place(cid, int(round(lx)), int(round(ly)))
    if stage != "gp":
        layout.fixed[: net.nq] = layout.placed[: net.nq]
    return layout, stage, dict(data.get("metadata", {}))


def save_placement(layout: Layout, path: PathLike, stage: str, metadata: Optional[dict] = None):
    _dump(placement_to_dict(layout, stage, metadata), path)


def load_placement(net: NetGraph, path: PathLike) -> Tuple[Layout, str, dict]:
    return placement_from_dict(net, _read(path))
