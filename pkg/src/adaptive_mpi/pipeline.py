"""End-to-end stage drivers shared by the CLI and the HTTP service.

Every stage writes its outputs plus a run.json echoing the effective config
and the SHA-256 of each input file, so runs are reproducible and auditable.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from PIL import Image

from . import depthprep, inpaint, metrics, mpiformat, renderer, slicer
from .config import PipelineConfig
from .depthprep import DisparityMap, PreprocessConfig
from .errors import InvalidArgumentError
from .renderer import RenderSettings
from .slicer import SlicingConfig

log = logging.getLogger(__name__)


def load_image(path: str | Path) -> np.ndarray:
    """RGB image as float64 in [0, 1]."""
    arr = np.asarray(Image.open(path).convert("RGB"))
    return arr.astype(np.float64) / 255.0


def save_image(img: np.ndarray, path: str | Path) -> None:
    q = np.clip(np.floor(img * 255.0 + 0.5), 0, 255).astype(np.uint8)
    Image.fromarray(q).save(path)


def _sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_run_record(out_dir: Path, cfg: PipelineConfig, inputs: dict[str, str | Path],
                     extra: dict | None = None) -> None:
    record = {
        "config": cfg.to_dict(),
        "inputs": {name: {"path": str(p), "sha256": _sha256(p)} for name, p in inputs.items()},
    }
    if extra:
        record.update(extra)
    with open(out_dir / "run.json", "w") as f:
        json.dump(record, f, indent=2, sort_keys=True)
        f.write("\n")


def _preprocess_config(cfg: PipelineConfig) -> PreprocessConfig:
    return PreprocessConfig(
        bilateral_spatial_sigma=cfg.bilateral_spatial_sigma,
        bilateral_range_sigma=cfg.bilateral_range_sigma,
        bilateral_radius=cfg.bilateral_radius,
        canny_low=cfg.canny_low,
        canny_high=cfg.canny_high,
        band_kernel=cfg.band_kernel,
        band_iterations=cfg.band_iterations,
    )


def run_fuse(inputs: list[tuple[Path, bool]], out_path: Path, cfg: PipelineConfig) -> dict:
    """Median-fuse depth predictions into a pseudo ground truth at the
    largest input resolution. Flip-flagged members are un-flipped first."""
    if not inputs:
        raise InvalidArgumentError("no input depth maps")
    preds = []
    for path, flipped in inputs:
        d = depthprep.load_disparity(path)
        values = d.values[:, ::-1] if flipped else d.values
        preds.append(values)
    target_h = max(p.shape[0] for p in preds)
    target_w = max(p.shape[1] for p in preds)
    fused = depthprep.fuse_ensemble(preds, target_h, target_w)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    depthprep.save_disparity(fused, out_path)
    write_run_record(
        out_path.parent, cfg,
        {f"depth_{i}": p for i, (p, _) in enumerate(inputs)},
        {"output": out_path.name, "fused_dims": list(fused.shape)},
    )
    return {"output": str(out_path), "height": target_h, "width": target_w}


def run_slice(image_path: Path, depth_path: Path, out_dir: Path, cfg: PipelineConfig,
              uniform: int | None = None) -> dict:
    """Slice an image + disparity into an MPI container (adaptive, or the
    uniform baseline when a plane count is given)."""
    src = load_image(image_path)
    raw = depthprep.load_disparity(depth_path)
    if src.shape[:2] != raw.shape:
        raise InvalidArgumentError(
            f"image dims {src.shape[:2]} do not match depth dims {raw.shape}"
        )
    pre = depthprep.preprocess(raw, _preprocess_config(cfg))
    if uniform is not None:
        plan, mpi = slicer.slice_uniform(src, pre, raw, uniform)
    else:
        scfg = SlicingConfig(max_planes=cfg.max_planes, xi=cfg.xi, min_value=cfg.min_value,
                             include_edge_band=cfg.include_edge_band)
        plan, mpi = slicer.slice_adaptive(src, pre, raw, scfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    mpiformat.save(mpi, out_dir, parallax_scale=cfg.parallax_scale)
    write_run_record(
        out_dir, cfg, {"image": image_path, "depth": depth_path},
        {"mode": "uniform" if uniform is not None else "adaptive",
         "plan": {"transitions": plan.transitions,
                  "plane_disparities": plan.plane_disparities}},
    )
    return {"layer_count": plan.layer_count, "transitions": plan.transitions,
            "plane_disparities": plan.plane_disparities, "container": str(out_dir)}


def run_inpaint(container_in: Path, container_out: Path, cfg: PipelineConfig) -> dict:
    mpi, parallax_scale = mpiformat.load(container_in)
    filled = inpaint.inpaint_mpi(mpi, band_px=cfg.band_px,
                                 max_iters=cfg.inpaint_max_iters, tol=cfg.inpaint_tol)
    container_out.mkdir(parents=True, exist_ok=True)
    mpiformat.save(filled, container_out, parallax_scale=parallax_scale)
    write_run_record(container_out, cfg,
                     {"manifest": container_in / mpiformat.MANIFEST_NAME},
                     {"band_px": inpaint.scaled_band(cfg.band_px, mpi.source_dims)})
    return {"layer_count": len(filled.layers), "container": str(container_out)}


def run_render(container: Path, out_dir: Path, cfg: PipelineConfig,
               camera_file: Path | None = None,
               parallax_override: float | None = None) -> dict:
    """Render a trajectory (or the relative poses of a camera file) to a
    numbered PNG frame directory plus an index JSON. The container's stored
    parallax scale applies unless explicitly overridden."""
    mpi, parallax_scale = mpiformat.load(container)
    settings = RenderSettings(parallax_scale=parallax_override or parallax_scale)
    if camera_file is not None:
        poses = _poses_from_camera_file(camera_file)
    else:
        poses = renderer.trajectory_poses(cfg.trajectory, cfg.frames, cfg.amplitude)
    out_dir.mkdir(parents=True, exist_ok=True)

    def render_one(item):
        idx, pose = item
        frame = renderer.render_view(mpi, pose, settings)
        save_image(frame, out_dir / f"frame_{idx:05d}.png")

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            list(pool.map(render_one, enumerate(poses)))
    else:
        for item in enumerate(poses):
            render_one(item)

    index = {"frame_count": len(poses), "fps": cfg.fps,
             "pattern": "frame_{:05d}.png"}
    with open(out_dir / "frames.json", "w") as f:
        json.dump(index, f, indent=2, sort_keys=True)
        f.write("\n")
    inputs = {"manifest": container / mpiformat.MANIFEST_NAME}
    if camera_file is not None:
        inputs["cameras"] = camera_file
    write_run_record(out_dir, cfg, inputs, {"frame_count": len(poses)})
    return index


def _poses_from_camera_file(camera_file: Path):
    from .camera import parse_camera_line

    lines = [ln for ln in camera_file.read_text().splitlines() if ln.strip()]
    # First line may be a video URL header (dataset convention); skip it.
    if lines and len(lines[0].split()) != 17:
        lines = lines[1:]
    if not lines:
        raise InvalidArgumentError(f"{camera_file}: no camera lines")
    parsed = [parse_camera_line(ln) for ln in lines]
    _, _, source = parsed[0]
    return [pose.compose_relative(source) for _, _, pose in parsed]


def run_eval(manifest_path: Path, out_dir: Path, cfg: PipelineConfig) -> list[dict]:
    """Score depth and view pairs listed in a JSON manifest; write CSV + JSON."""
    with open(manifest_path) as f:
        manifest = json.load(f)
    depth_pairs = manifest.get("depth_pairs", [])
    view_pairs = manifest.get("view_pairs", [])
    if not depth_pairs and not view_pairs:
        raise InvalidArgumentError("evaluation manifest lists no pairs")
    base = manifest_path.parent
    rows = []
    for pair in depth_pairs:
        pred = depthprep.load_disparity(base / pair["pred"])
        gt = depthprep.load_disparity(base / pair["gt"])
        aligned = metrics.align_median_std(pred, gt)
        report = metrics.depth_metrics(aligned, gt)
        rows.append({"name": pair.get("name", pair["pred"]), "kind": "depth",
                     **report.as_dict()})
    for pair in view_pairs:
        a = load_image(base / pair["pred"])
        b = load_image(base / pair["gt"])
        if cfg.eval_crop > 0:
            a = metrics.crop_margin(a, cfg.eval_crop)
            b = metrics.crop_margin(b, cfg.eval_crop)
        rows.append({"name": pair.get("name", pair["pred"]), "kind": "view",
                     "ssim": metrics.ssim(a, b), "psnr": metrics.psnr(a, b)})

    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.json", "w") as f:
        json.dump(rows, f, indent=2, sort_keys=True)
        f.write("\n")
    fieldnames = ["name", "kind", "delta_1", "delta_2", "delta_3", "rmse", "rel",
                  "ssim", "psnr"]
    with open(out_dir / "report.csv", "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    write_run_record(out_dir, cfg, {"manifest": manifest_path}, {"rows": len(rows)})
    return rows


def run_export_training_pairs(container: Path, out_dir: Path, count: int,
                              cfg: PipelineConfig) -> dict:
    mpi, _ = mpiformat.load(container)
    index = inpaint.export_training_pairs(mpi, out_dir, count,
                                          band_px=cfg.band_px, seed=cfg.seed)
    write_run_record(out_dir, cfg, {"manifest": container / mpiformat.MANIFEST_NAME},
                     {"pairs": len(index)})
    return {"pairs": len(index), "out_dir": str(out_dir)}
