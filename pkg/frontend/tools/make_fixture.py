#!/usr/bin/env python3
"""Generate the viewer/renderer agreement fixture.

Hand-authors a 3-layer MPI container (documented container format only), then
renders frames at six poses through the pipeline CLI. The viewer test replays
the same offsets through its own compositor and compares frames numerically.

Usage: python3 tools/make_fixture.py   (from the frontend/ directory)
"""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
from PIL import Image

H, W = 48, 64
OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

# identity first (doubles as the zero-offset source), then 5 offsets
OFFSETS = [
    (0.0, 0.0, 0.0),
    (0.02, 0.0, 0.0),
    (-0.035, 0.0, 0.0),
    (0.0, 0.025, 0.0),
    (0.015, -0.02, 0.0),
    (0.0, 0.0, 0.03),
]


def texture(rng, h, w, base):
    img = np.empty((h, w, 3))
    img[:] = base
    yy, xx = np.mgrid[0:h, 0:w]
    img[..., 0] += 0.15 * np.sin(xx / 3.0)
    img[..., 1] += 0.15 * np.cos(yy / 4.0)
    img += rng.random((h, w, 3)) * 0.1
    return np.clip(img, 0.0, 1.0)


def save_layer(rgb, alpha, path):
    rgba = np.dstack([rgb, alpha])
    q = np.clip(np.floor(rgba * 255.0 + 0.5), 0, 255).astype(np.uint8)
    Image.fromarray(q, mode="RGBA").save(path)


def main():
    rng = np.random.default_rng(7)
    container = OUT / "container"
    container.mkdir(parents=True, exist_ok=True)

    # far: opaque background; mid: disc; near: square
    bg = texture(rng, H, W, (0.2, 0.3, 0.5))
    save_layer(bg, np.ones((H, W)), container / "layer_000.png")

    yy, xx = np.mgrid[0:H, 0:W]
    disc = ((yy - 22.0) ** 2 + (xx - 26.0) ** 2) <= 11.0 ** 2
    mid = texture(rng, H, W, (0.7, 0.4, 0.2))
    save_layer(mid, disc.astype(float), container / "layer_001.png")

    square = np.zeros((H, W))
    square[28:42, 40:58] = 1.0
    near = texture(rng, H, W, (0.3, 0.7, 0.3))
    save_layer(near, square, container / "layer_002.png")

    manifest = {
        "intrinsics": {"cx": W / 2.0, "cy": H / 2.0, "fx": float(W), "fy": float(W)},
        "layer_count": 3,
        "layers": [
            {"disparity": 0.2, "file": "layer_000.png"},
            {"disparity": 0.6, "file": "layer_001.png"},
            {"disparity": 1.0, "file": "layer_002.png"},
        ],
        "parallax_scale": 1.0,
        "source_dims": {"height": H, "width": W},
        "version": {"major": 1, "minor": 0},
    }
    (container / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    # camera file: world-to-camera lines; the CLI renders poses relative to the
    # first line, so absolute translations equal the intended offsets
    lines = ["https://example.com/fixture"]
    for i, (tx, ty, tz) in enumerate(OFFSETS):
        ext = f"1 0 0 {tx}  0 1 0 {ty}  0 0 1 {tz}"
        lines.append(f"{i} 1.0 1.0 0.5 0.5 {ext}")
    cams = OUT / "cameras.txt"
    cams.write_text("\n".join(lines) + "\n")

    frames = OUT / "frames"
    subprocess.run(
        [sys.executable, "-m", "adaptive_mpi.cli", "render", str(container),
         "-o", str(frames), "--cameras", str(cams)],
        check=True,
    )
    (OUT / "offsets.json").write_text(json.dumps(
        [{"tx": tx, "ty": ty, "tz": tz} for tx, ty, tz in OFFSETS], indent=2) + "\n")
    print(f"fixture written to {OUT}")


if __name__ == "__main__":
    main()
