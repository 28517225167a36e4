"""Adaptive multiplane images from a single picture plus a disparity map.

Stages: disparity preprocessing and ensemble fusion (depthprep), adaptive
depth-histogram slicing (slicer), occlusion-aware layer inpainting (inpaint),
homography rendering (renderer), quality metrics (metrics), a portable
container format (mpiformat), a CLI (cli) and an HTTP service (service).
"""

from .camera import CameraIntrinsics, CameraPose
from .config import PipelineConfig
from .depthprep import DisparityMap, PreprocessConfig, PreprocessedDepth
from .renderer import RenderSettings
from .slicer import AdaptiveMpi, Layer, SlicingConfig, SlicingPlan

__all__ = [
    "AdaptiveMpi",
    "CameraIntrinsics",
    "CameraPose",
    "DisparityMap",
    "Layer",
    "PipelineConfig",
    "PreprocessConfig",
    "PreprocessedDepth",
    "RenderSettings",
    "SlicingConfig",
    "SlicingPlan",
]

__version__ = "0.1.0"
