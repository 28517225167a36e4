"""Pipeline configuration: defaults < config file < explicit overrides."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvalidArgumentError


@dataclass
class PipelineConfig:
    # slicing
    max_planes: int = 16
    xi: int = 8
    min_value: float = 0.1
    include_edge_band: bool = False
    # depth preprocessing
    bilateral_spatial_sigma: float = 5.0
    bilateral_range_sigma: float = 25.0
    bilateral_radius: int = 7
    canny_low: float = 50.0
    canny_high: float = 150.0
    band_kernel: int = 3
    band_iterations: int = 3
    # inpainting
    band_px: int = 40
    inpaint_max_iters: int = 2000
    inpaint_tol: float = 1e-4
    # rendering
    parallax_scale: float = 1.0
    trajectory: str = "swing"
    frames: int = 180
    fps: int = 30
    amplitude: float = 0.02
    # evaluation
    eval_crop: float = 0.05
    # execution
    jobs: int = 1
    seed: int = 0

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def merged(self, overrides: dict) -> "PipelineConfig":
        """New config with non-None overrides applied; unknown keys rejected."""
        known = {f.name for f in dataclasses.fields(self)}
        updates = {}
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in known:
                raise InvalidArgumentError(f"unknown config key {key!r}")
            updates[key] = value
        return dataclasses.replace(self, **updates)

    @classmethod
    def load(cls, path: str | Path | None, overrides: dict | None = None) -> "PipelineConfig":
        cfg = cls()
        if path is not None:
            with open(path) as f:
                try:
                    data = json.load(f)
                except json.JSONDecodeError as exc:
                    raise InvalidArgumentError(f"{path}: invalid config JSON: {exc}") from exc
            cfg = cfg.merged(data)
        if overrides:
            cfg = cfg.merged(overrides)
        return cfg
