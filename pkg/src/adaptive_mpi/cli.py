"""Operator-facing pipeline driver.

Exit codes: 0 success, 1 processing error, 2 usage error. Logs go to stderr;
data only ever lands in files.
"""

from __future__ import annotations

import functools
import logging
import sys
from pathlib import Path

import click

from . import pipeline
from .config import PipelineConfig

log = logging.getLogger("adaptive_mpi")


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except (ValueError, OSError) as exc:
            log.error("%s", exc)
            sys.exit(1)

    return wrapper


def _config(config_path, **overrides) -> PipelineConfig:
    return PipelineConfig.load(config_path, overrides)


config_option = click.option(
    "--config", "config_path", type=click.Path(exists=True, dir_okay=False),
    default=None, help="JSON config file; flags override its values.")


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Debug logging.")
def main(verbose):
    """Adaptive multiplane image pipeline."""
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.command()
@click.argument("depth_files", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--flip", "flips", multiple=True, type=int,
              help="Index of an input that is horizontally flipped (repeatable).")
@click.option("-o", "--out", required=True, type=click.Path(), help="Output PFM/PNG path.")
@config_option
@_handle_errors
def fuse(depth_files, flips, out, config_path):
    """Median-fuse an ensemble of depth predictions."""
    cfg = _config(config_path)
    flipped = set(flips)
    inputs = [(Path(p), i in flipped) for i, p in enumerate(depth_files)]
    result = pipeline.run_fuse(inputs, Path(out), cfg)
    log.info("fused %d maps -> %s (%dx%d)", len(inputs), result["output"],
             result["height"], result["width"])


@main.command("slice")
@click.argument("image", type=click.Path(exists=True, dir_okay=False))
@click.argument("depth", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--out", required=True, type=click.Path(), help="Container directory.")
@click.option("--uniform", type=int, default=None,
              help="Uniform baseline with this many planes instead of adaptive slicing.")
@click.option("--max-planes", type=int, default=None)
@click.option("--xi", type=int, default=None)
@click.option("--min-value", type=float, default=None)
@click.option("--include-edge-band", is_flag=True, default=None,
              help="Keep edge-band pixels in the slicing histogram.")
@click.option("--parallax-scale", type=float, default=None)
@config_option
@_handle_errors
def slice_cmd(image, depth, out, uniform, max_planes, xi, min_value,
              include_edge_band, parallax_scale, config_path):
    """Slice IMAGE + DEPTH into an MPI container."""
    cfg = _config(config_path, max_planes=max_planes, xi=xi, min_value=min_value,
                  include_edge_band=include_edge_band, parallax_scale=parallax_scale)
    result = pipeline.run_slice(Path(image), Path(depth), Path(out), cfg, uniform=uniform)
    log.info("sliced into %d layers at %s", result["layer_count"], result["container"])


@main.command()
@click.argument("container_in", type=click.Path(exists=True, file_okay=False))
@click.argument("container_out", type=click.Path())
@click.option("--band", "band_px", type=int, default=None, help="Margin width in pixels.")
@config_option
@_handle_errors
def inpaint(container_in, container_out, band_px, config_path):
    """Fill occluded layer margins of a container."""
    cfg = _config(config_path, band_px=band_px)
    result = pipeline.run_inpaint(Path(container_in), Path(container_out), cfg)
    log.info("inpainted %d layers -> %s", result["layer_count"], result["container"])


@main.command()
@click.argument("container", type=click.Path(exists=True, file_okay=False))
@click.option("-o", "--out", required=True, type=click.Path(), help="Frame directory.")
@click.option("--trajectory", type=click.Choice(["swing", "circle", "zoom"]), default=None)
@click.option("--frames", type=int, default=None)
@click.option("--fps", type=int, default=None)
@click.option("--amplitude", type=float, default=None)
@click.option("--cameras", "camera_file", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Camera trajectory file (one pose line per frame).")
@click.option("--parallax-scale", type=float, default=None,
              help="Override the container's stored parallax scale.")
@click.option("--jobs", type=int, default=None)
@config_option
@_handle_errors
def render(container, out, trajectory, frames, fps, amplitude, camera_file,
           parallax_scale, jobs, config_path):
    """Render novel-view frames from a container."""
    cfg = _config(config_path, trajectory=trajectory, frames=frames, fps=fps,
                  amplitude=amplitude, jobs=jobs)
    result = pipeline.run_render(
        Path(container), Path(out), cfg,
        camera_file=Path(camera_file) if camera_file else None,
        parallax_override=parallax_scale)
    log.info("rendered %d frames to %s", result["frame_count"], out)


@main.command("eval")
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--out", required=True, type=click.Path(), help="Report directory.")
@click.option("--crop", "eval_crop", type=float, default=None,
              help="Fractional frame margin to trim before view metrics.")
@config_option
@_handle_errors
def eval_cmd(manifest, out, eval_crop, config_path):
    """Score depth/view pairs listed in a JSON manifest."""
    cfg = _config(config_path, eval_crop=eval_crop)
    rows = pipeline.run_eval(Path(manifest), Path(out), cfg)
    log.info("evaluated %d pairs -> %s", len(rows), out)


@main.command("export-training-pairs")
@click.argument("container", type=click.Path(exists=True, file_okay=False))
@click.option("-o", "--out", required=True, type=click.Path())
@click.option("--count", type=int, default=10, show_default=True)
@click.option("--band", "band_px", type=int, default=None)
@click.option("--seed", type=int, default=None)
@config_option
@_handle_errors
def export_training_pairs(container, out, count, band_px, seed, config_path):
    """Write inpainting training triplets sampled from a container."""
    cfg = _config(config_path, band_px=band_px, seed=seed)
    result = pipeline.run_export_training_pairs(Path(container), Path(out), count, cfg)
    log.info("wrote %d pairs to %s", result["pairs"], result["out_dir"])


if __name__ == "__main__":
    main()
