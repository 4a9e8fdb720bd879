"""SVG rendering of a layout, components coloured by frequency."""

from __future__ import annotations

import colorsys
from pathlib import Path
from typing import Optional, Union
from xml.sax.saxutils import escape

from .layout import Layout, ViolationReport

SCALE = 10.0  # px per cell


def _hue(freq: float, lo: float, hi: float) -> str:
    t = 0.5 if hi <= lo else (freq - lo) / (hi - lo)
    r, g, b = colorsys.hsv_to_rgb(0.7 * (1 - t), 0.65, 0.9)
    return f"#{int(r * 255):02x}{int(g * 255):02x}{int(b * 255):02x}"


def render_svg(
    layout: Layout,
    path: Optional[Union[str, Path]] = None,
    violations: Optional[ViolationReport] = None,
) -> str:
    """Render placed components as rects (y up); returns the SVG text.

    With ``violations`` each overlap or spacing entry adds a red marker at
    the first participant.  Writes ``path`` when given.
    """
    net = layout.net
    W, H = layout.width * SCALE, layout.height * SCALE
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W:g}" height="{H:g}" viewBox="0 0 {W:g} {H:g}">',
        f'<rect class="border" x="0" y="0" width="{W:g}" height="{H:g}" fill="white" stroke="black" stroke-width="1"/>',
    ]
    placed = [c for c in range(net.n) if layout.placed[c]]
    if placed:
        ranges = {}
        for is_q in (True, False):
            sel = [net.freq[c] for c in placed if net.is_qubit[c] == is_q]
            ranges[is_q] = (min(sel), max(sel)) if sel else (0.0, 1.0)
        for cid in placed:
            x, y = layout.cells[cid]
            w, h = net.size[cid]
            lo, hi = ranges[bool(net.is_qubit[cid])]
            px, py = x * SCALE, H - (y + h) * SCALE
            parts.append(
                f'<rect class="{"qubit" if net.is_qubit[cid] else "block"}" x="{px:g}" y="{py:g}" '
                f'width="{w * SCALE:g}" height="{h * SCALE:g}" fill="{_hue(net.freq[cid], lo, hi)}" '
                f'stroke="#333" stroke-width="0.3"><title>{escape(net.name_of(cid))} {net.freq[cid]:.3f} GHz</title></rect>'
            )
    if violations is not None:
        for v in violations.entries:
            cid = v.participants[0]
            cx, cy = layout.center_um(cid)
            px, py = cx / layout.pitch * SCALE, H - cy / layout.pitch * SCALE
            parts.append(f'<circle class="violation" cx="{px:g}" cy="{py:g}" r="{SCALE / 2:g}" fill="none" stroke="red" stroke-width="1.5"/>')
    parts.append("</svg>")
    text = "\n".join(parts) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
