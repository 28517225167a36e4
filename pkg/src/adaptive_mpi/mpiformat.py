"""Portable MPI container: manifest.json plus RGBA layer PNGs, far to near.

The manifest is written with sorted keys and a fixed layout so two saves of
the same MPI are byte-identical. Major version bumps gate parsing.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .camera import CameraIntrinsics
from .errors import ContainerError, InvalidArgumentError, UnsupportedVersionError
from .slicer import AdaptiveMpi, Layer

FORMAT_MAJOR = 1
FORMAT_MINOR = 0
MANIFEST_NAME = "manifest.json"


def save(mpi: AdaptiveMpi, path: str | Path, parallax_scale: float = 1.0) -> None:
    """Write manifest.json and layer_XXX.png files into a directory."""
    if not mpi.layers:
        raise InvalidArgumentError("refusing to save an MPI with no layers")
    for i, layer in enumerate(mpi.layers):
        if not layer.occupancy.any():
            raise InvalidArgumentError(f"layer {i} is empty")
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, layer in enumerate(mpi.layers):
        name = f"layer_{i:03d}.png"
        _write_rgba_png(layer.rgba, path / name)
        entries.append({"disparity": float(layer.disparity), "file": name})
    manifest = {
        "intrinsics": {
            "cx": mpi.intrinsics.cx,
            "cy": mpi.intrinsics.cy,
            "fx": mpi.intrinsics.fx,
            "fy": mpi.intrinsics.fy,
        },
        "layer_count": len(mpi.layers),
        "layers": entries,
        "parallax_scale": parallax_scale,
        "source_dims": {"height": mpi.source_dims[0], "width": mpi.source_dims[1]},
        "version": {"major": FORMAT_MAJOR, "minor": FORMAT_MINOR},
    }
    # Manifest last: it anchors container consistency.
    with open(path / MANIFEST_NAME, "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def load(path: str | Path) -> tuple[AdaptiveMpi, float]:
    """Read and validate a container; returns (mpi, parallax_scale)."""
    path = Path(path)
    manifest_path = path / MANIFEST_NAME
    if not manifest_path.is_file():
        raise ContainerError(f"{path}: no {MANIFEST_NAME}")
    with open(manifest_path) as f:
        try:
            manifest = json.load(f)
        except json.JSONDecodeError as exc:
            raise ContainerError(f"{manifest_path}: invalid JSON: {exc}") from exc

    version = manifest.get("version", {})
    if version.get("major") != FORMAT_MAJOR:
        raise UnsupportedVersionError(
            f"{path}: unsupported container major version {version.get('major')!r}"
        )
    entries = manifest.get("layers", [])
    if manifest.get("layer_count") != len(entries):
        raise ContainerError(f"{path}: layer_count does not match listed layers")
    if not entries:
        raise ContainerError(f"{path}: container has no layers")

    dims = manifest["source_dims"]
    source_dims = (int(dims["height"]), int(dims["width"]))
    ki = manifest["intrinsics"]
    intrinsics = CameraIntrinsics(fx=ki["fx"], fy=ki["fy"], cx=ki["cx"], cy=ki["cy"])

    layers = []
    prev_disp = -np.inf
    for i, entry in enumerate(entries):
        disp = float(entry["disparity"])
        if disp <= prev_disp:
            raise ContainerError(f"{path}: layer {i} disparity {disp} not increasing")
        prev_disp = disp
        file_path = path / entry["file"]
        if not file_path.is_file():
            raise ContainerError(f"{path}: layer {i} file {entry['file']} missing")
        try:
            arr = np.asarray(Image.open(file_path).convert("RGBA"))
        except Exception as exc:
            raise ContainerError(f"{path}: layer {i} file {entry['file']} undecodable: {exc}")
        if arr.shape[:2] != source_dims:
            raise ContainerError(
                f"{path}: layer {i} has dims {arr.shape[:2]}, expected {source_dims}"
            )
        rgba = arr.astype(np.float64) / 255.0
        occupancy = rgba[..., 3] > 0.5
        layers.append(Layer(rgba=rgba, disparity=disp, occupancy=occupancy))

    mpi = AdaptiveMpi(layers=layers, intrinsics=intrinsics, source_dims=source_dims)
    return mpi, float(manifest.get("parallax_scale", 1.0))


def _write_rgba_png(rgba: np.ndarray, path: Path) -> None:
    # round half away from zero (values are non-negative here)
    q = np.clip(np.floor(rgba * 255.0 + 0.5), 0, 255).astype(np.uint8)
    if q.ndim != 3 or q.shape[2] != 4:
        raise InvalidArgumentError("layer raster must be RGBA")
    Image.fromarray(q, mode="RGBA").save(path)
