"""Run configuration: geometry, hotspot and error-model constants, DP knobs."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional, Union

from .detailed import DPConfig
from .errors import InvalidArgumentError
from .gp import DEFAULT_AREA_FACTOR
from .metrics import ErrorModelConfig, HotspotConfig
from .netlist import PAD_UM, PITCH_UM, QUBIT_SIZE_UM


@dataclass
class Geometry:
    pitch_um: float = PITCH_UM
    qubit_size_um: float = QUBIT_SIZE_UM
    pad_um: float = PAD_UM
    area_factor: float = DEFAULT_AREA_FACTOR
    gp_noise: float = 0.5  # cells
    gp_margin: float = 2.0  # cells


@dataclass
class Config:
    geometry: Geometry = field(default_factory=Geometry)
    hotspot: HotspotConfig = field(default_factory=HotspotConfig)
    error_model: ErrorModelConfig = field(default_factory=ErrorModelConfig)
    dp: DPConfig = field(default_factory=DPConfig)
    run_dp: bool = True
    program_qubits: int = 5
    program_samples: int = 50

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Config":
        sections = {"geometry": Geometry, "hotspot": HotspotConfig, "error_model": ErrorModelConfig, "dp": DPConfig}
        kwargs = {}
        known = {f.name for f in fields(cls)}
        for key, value in data.items():
            if key not in known:
                raise InvalidArgumentError(f"unknown config key {key!r}")
            if key in sections:
                kwargs[key] = _section(sections[key], value, key)
            else:
                kwargs[key] = value
        return cls(**kwargs)


def _section(kind, value, name):
    if not isinstance(value, dict):
        raise InvalidArgumentError(f"config section {name!r} must be an object")
    allowed = {f.name for f in fields(kind)}
    unknown = set(value) - allowed
    if unknown:
        raise InvalidArgumentError(f"unknown keys in {name!r}: {sorted(unknown)}")
    try:
        return kind(**value)
    except TypeError as exc:
        raise InvalidArgumentError(f"bad config section {name!r}: {exc}") from exc


def load_config(path: Optional[Union[str, Path]]) -> Config:
    if path is None:
        return Config()
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidArgumentError(f"cannot read config {path}: {exc}") from exc
    return Config.from_dict(data)
