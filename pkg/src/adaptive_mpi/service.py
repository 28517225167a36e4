"""HTTP front end for the pipeline.

All stage endpoints operate on paths inside a single workspace directory,
which is also mounted read-only under /files so the browser viewer can fetch
MPI containers (manifest.json plus layer PNGs) directly.

Run with: uvicorn adaptive_mpi.service:app  (AMPI_WORKSPACE sets the root).
"""

from __future__ import annotations

import os
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import pipeline
from .config import PipelineConfig
from .errors import ContainerError, InvalidArgumentError


class SliceRequest(BaseModel):
    image: str
    depth: str
    out: str
    uniform: int | None = None
    config: dict = Field(default_factory=dict)


class SliceResponse(BaseModel):
    layer_count: int
    transitions: list[int]
    plane_disparities: list[float]
    container: str


class InpaintRequest(BaseModel):
    container_in: str
    container_out: str
    config: dict = Field(default_factory=dict)


class InpaintResponse(BaseModel):
    layer_count: int
    container: str


class RenderRequest(BaseModel):
    container: str
    out: str
    camera_file: str | None = None
    parallax_scale: float | None = None
    config: dict = Field(default_factory=dict)


class RenderResponse(BaseModel):
    frame_count: int
    fps: int
    pattern: str


class FuseRequest(BaseModel):
    depth_files: list[str]
    flipped: list[int] = Field(default_factory=list)
    out: str
    config: dict = Field(default_factory=dict)


class FuseResponse(BaseModel):
    output: str
    height: int
    width: int


class EvalRequest(BaseModel):
    manifest: str
    out: str
    config: dict = Field(default_factory=dict)


class EvalRow(BaseModel):
    name: str
    kind: str
    delta_1: float | None = None
    delta_2: float | None = None
    delta_3: float | None = None
    rmse: float | None = None
    rel: float | None = None
    ssim: float | None = None
    psnr: float | None = None


def create_app(workspace: str | Path | None = None) -> FastAPI:
    root = Path(workspace or os.environ.get("AMPI_WORKSPACE", ".")).resolve()
    app = FastAPI(title="adaptive-mpi", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    def resolve(rel: str) -> Path:
        p = (root / rel).resolve()
        if not p.is_relative_to(root):
            raise HTTPException(status_code=400, detail=f"path {rel!r} escapes the workspace")
        return p

    def cfg_from(overrides: dict) -> PipelineConfig:
        try:
            return PipelineConfig().merged(overrides)
        except InvalidArgumentError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "workspace": str(root)}

    @app.post("/slice", response_model=SliceResponse)
    def slice_endpoint(req: SliceRequest) -> SliceResponse:
        cfg = cfg_from(req.config)
        result = _run(pipeline.run_slice, resolve(req.image), resolve(req.depth),
                      resolve(req.out), cfg, uniform=req.uniform)
        result["container"] = req.out
        return SliceResponse(**result)

    @app.post("/inpaint", response_model=InpaintResponse)
    def inpaint_endpoint(req: InpaintRequest) -> InpaintResponse:
        cfg = cfg_from(req.config)
        result = _run(pipeline.run_inpaint, resolve(req.container_in),
                      resolve(req.container_out), cfg)
        result["container"] = req.container_out
        return InpaintResponse(**result)

    @app.post("/render", response_model=RenderResponse)
    def render_endpoint(req: RenderRequest) -> RenderResponse:
        cfg = cfg_from(req.config)
        camera = resolve(req.camera_file) if req.camera_file else None
        result = _run(pipeline.run_render, resolve(req.container), resolve(req.out), cfg,
                      camera_file=camera, parallax_override=req.parallax_scale)
        return RenderResponse(**result)

    @app.post("/fuse", response_model=FuseResponse)
    def fuse_endpoint(req: FuseRequest) -> FuseResponse:
        cfg = cfg_from(req.config)
        flipped = set(req.flipped)
        inputs = [(resolve(p), i in flipped) for i, p in enumerate(req.depth_files)]
        result = _run(pipeline.run_fuse, inputs, resolve(req.out), cfg)
        return FuseResponse(**result)

    @app.post("/eval", response_model=list[EvalRow])
    def eval_endpoint(req: EvalRequest) -> list[EvalRow]:
        cfg = cfg_from(req.config)
        rows = _run(pipeline.run_eval, resolve(req.manifest), resolve(req.out), cfg)
        return [EvalRow(**row) for row in rows]

    app.mount("/files", StaticFiles(directory=root), name="files")
    return app


def _run(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except FileNotFoundError as exc:
        raise HTTPException(status_code=404, detail=str(exc))
    except ContainerError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    except (InvalidArgumentError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=str(exc))


app = create_app()
