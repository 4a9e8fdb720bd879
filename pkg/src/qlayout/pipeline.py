"""Engine orchestration: qubit stage, block stage, optional detailed placement."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from .config import Config
from .detailed import detailed_place
from .errors import InvalidArgumentError, InvariantError, LayoutError
from .gp import sample_programs
from .layout import Layout, validate
from .metrics import ProgramFootprint, metrics_report
from .qubit_lg import SpacingPolicy, legalize_qubits
from .resonator_lg import abacus_legalize, legalize_resonators, tetris_legalize

logger = logging.getLogger(__name__)

# engine -> (qubit spacing policy, block legalizer)
ENGINES = {
    "qgdp": (SpacingPolicy(2, 1), legalize_resonators),
    "q-tetris": (SpacingPolicy(2, 1), tetris_legalize),
    "q-abacus": (SpacingPolicy(2, 1), abacus_legalize),
    "tetris": (SpacingPolicy(0, 0), tetris_legalize),
    "abacus": (SpacingPolicy(0, 0), abacus_legalize),
}


@dataclass
class StageReport:
    stage: str
    ms: float
    metrics: Optional[dict] = None
    extra: Dict[str, object] = field(default_factory=dict)


def _tag(exc: LayoutError, stage: str) -> LayoutError:
    exc.args = (f"[{stage}] {exc.args[0] if exc.args else ''}",) + tuple(exc.args[1:])
    exc.stage = stage
    return exc


def run_pipeline(
    gp: Layout,
    engine: str = "qgdp",
    config: Optional[Config] = None,
    programs: Optional[Sequence[ProgramFootprint]] = None,
    run_dp: Optional[bool] = None,
):
    """Legalize a GP layout with ``engine``; returns ``(layout, reports)``.

    ``gp`` is left untouched.  ``reports`` maps stage name to
    :class:`StageReport`; metrics are taken after the block stage and after
    detailed placement.
    """
    if engine not in ENGINES:
        raise InvalidArgumentError(f"unknown engine {engine!r}; choose from {sorted(ENGINES)}")
    config = config or Config()
    run_dp = config.run_dp if run_dp is None else run_dp
    policy, block_lg = ENGINES[engine]
    layout = gp.copy()
    layout.meta["engine"] = engine
    if programs is None:
        programs = sample_programs(layout.net, config.program_qubits, config.program_samples)
    reports: Dict[str, StageReport] = {}

    t0 = time.perf_counter()
    try:
        q = legalize_qubits(layout, policy)
    except LayoutError as exc:
        raise _tag(exc, "qubit-lg")
    t1 = time.perf_counter()
    reports["qubit-lg"] = StageReport("qubit-lg", (t1 - t0) * 1e3, extra={"spacing": q.spacing, "displacement": q.displacement})

    try:
        block_lg(layout)
    except LayoutError as exc:
        raise _tag(exc, "resonator-lg")
    t2 = time.perf_counter()
    if validate(layout):
        raise InvariantError(f"[resonator-lg] {engine} produced an illegal layout")
    reports["resonator-lg"] = StageReport(
        "resonator-lg", (t2 - t1) * 1e3,
        metrics_report(layout, config.hotspot, config.error_model, programs),
    )

    if run_dp:
        t3 = time.perf_counter()
        qubits_before = layout.cells[: layout.net.nq].copy()
        dp = detailed_place(layout, config.dp, config.hotspot)
        t4 = time.perf_counter()
        if not np.array_equal(qubits_before, layout.cells[: layout.net.nq]) or validate(layout):
            raise InvariantError("[dp] detailed placement moved a qubit or broke legality")
        reports["dp"] = StageReport(
            "dp", (t4 - t3) * 1e3,
            metrics_report(layout, config.hotspot, config.error_model, programs),
            {"accepted": dp.accepted, "log": dp.log},
        )
    layout.meta["qubit_spacing_cells"] = q.spacing
    return layout, reports


def final_metrics(reports: Dict[str, StageReport]) -> dict:
    return (reports.get("dp") or reports["resonator-lg"]).metrics
