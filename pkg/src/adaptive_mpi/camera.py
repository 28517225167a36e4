"""Pinhole camera types and RealEstate10K-style trajectory line parsing."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CameraParseError, InvalidArgumentError

_ORTHO_TOL = 1e-3


@dataclass
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise InvalidArgumentError("focal lengths must be positive")

    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )

    def scaled(self, width: int, height: int) -> "CameraIntrinsics":
        """Un-normalize intrinsics given in fractional units to pixel units."""
        return CameraIntrinsics(
            fx=self.fx * width, fy=self.fy * height, cx=self.cx * width, cy=self.cy * height
        )


@dataclass
class CameraPose:
    """Rigid transform taking reference-camera coordinates to target-camera coordinates."""

    rotation: np.ndarray  # (3, 3), orthonormal, det +1
    translation: np.ndarray  # (3,)

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=np.float64)
        self.translation = np.asarray(self.translation, dtype=np.float64).reshape(3)
        err = np.abs(self.rotation.T @ self.rotation - np.eye(3)).max()
        if err > _ORTHO_TOL or np.linalg.det(self.rotation) < 0:
            raise InvalidArgumentError("rotation is not a proper orthonormal matrix")

    @classmethod
    def identity(cls) -> "CameraPose":
        return cls(rotation=np.eye(3), translation=np.zeros(3))

    @classmethod
    def from_translation(cls, tx: float, ty: float = 0.0, tz: float = 0.0) -> "CameraPose":
        return cls(rotation=np.eye(3), translation=np.array([tx, ty, tz]))

    def matrix(self) -> np.ndarray:
        """3x4 [R | t]."""
        return np.hstack([self.rotation, self.translation[:, None]])

    def compose_relative(self, source: "CameraPose") -> "CameraPose":
        """Relative pose P_self . P_source^-1 (both world-to-camera)."""
        r = self.rotation @ source.rotation.T
        t = self.translation - r @ source.translation
        return CameraPose(rotation=r, translation=t)


def parse_camera_line(line: str) -> tuple[float, CameraIntrinsics, CameraPose]:
    """One trajectory line: timestamp, 4 normalized intrinsics, 12 extrinsics.

    Extrinsics are a row-major 3x4 world-to-camera matrix. Intrinsics stay in
    normalized units; scale them by the frame dimensions at render time.
    """
    fields = line.split()
    if len(fields) != 17:
        raise CameraParseError(f"expected 17 fields per camera line, got {len(fields)}")
    try:
        nums = [float(v) for v in fields]
    except ValueError as exc:
        raise CameraParseError(f"non-numeric camera field: {exc}") from exc
    timestamp = nums[0]
    intr = CameraIntrinsics(fx=nums[1], fy=nums[2], cx=nums[3], cy=nums[4])
    ext = np.array(nums[5:17]).reshape(3, 4)
    r, t = ext[:, :3], ext[:, 3]
    if np.abs(r.T @ r - np.eye(3)).max() > _ORTHO_TOL:
        raise CameraParseError("camera rotation is not orthonormal")
    return timestamp, intr, CameraPose(rotation=r, translation=t)


def format_camera_line(
    timestamp: float, intr: CameraIntrinsics, pose: CameraPose
) -> str:
    values = [timestamp, intr.fx, intr.fy, intr.cx, intr.cy]
    values += pose.matrix().reshape(-1).tolist()
    return " ".join(repr(float(v)) for v in values)
