import numpy as np
import pytest

from adaptive_mpi.depthprep import DisparityMap


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_disc_scene(h=96, w=128, fg_disp=0.9, bg_disp=0.1, radius=None,
                    noise=0.0, rng=None):
    """Textured disc (near) over a textured background (far), with per-pixel
    ground-truth disparity. Returns (rgb, disparity_map, disc_mask)."""
    rng = rng or np.random.default_rng(0)
    radius = radius or min(h, w) // 4
    yy, xx = np.mgrid[0:h, 0:w]
    disc = (yy - h / 2) ** 2 + (xx - w / 2) ** 2 <= radius**2

    rgb = 0.25 + 0.5 * rng.random((h, w, 3))
    rgb[disc] = 0.1 + 0.3 * rng.random((int(disc.sum()), 3))

    disp = np.full((h, w), bg_disp)
    disp[disc] = fg_disp
    if noise > 0:
        disp += noise * rng.standard_normal((h, w))
        disp = np.clip(disp, 0.0, None)
    return rgb, DisparityMap(values=disp, valid=np.ones((h, w), dtype=bool)), disc


@pytest.fixture
def disc_scene():
    return make_disc_scene()


def make_two_layer_mpi(h=64, w=80, radius=12, fg_disp=0.9, bg_disp=0.1,
                       rng=None, intrinsics=None):
    """Hand-built two-layer MPI: textured background with a disc-shaped hole
    behind a textured foreground disc. Returns (mpi, disc_mask)."""
    from adaptive_mpi.camera import CameraIntrinsics
    from adaptive_mpi.slicer import AdaptiveMpi, Layer

    rng = rng or np.random.default_rng(5)
    yy, xx = np.mgrid[0:h, 0:w]
    disc = (yy - h / 2) ** 2 + (xx - w / 2) ** 2 <= radius**2

    bg = np.zeros((h, w, 4))
    bg[..., :3] = 0.3 + 0.4 * rng.random((h, w, 3))
    bg[..., 3] = (~disc).astype(float)
    bg[..., :3][disc] = 0.0

    fg = np.zeros((h, w, 4))
    fg[..., :3][disc] = 0.1 + 0.2 * rng.random((int(disc.sum()), 3))
    fg[..., 3] = disc.astype(float)

    intrinsics = intrinsics or CameraIntrinsics(fx=float(w), fy=float(w),
                                                cx=w / 2.0, cy=h / 2.0)
    mpi = AdaptiveMpi(
        layers=[Layer(rgba=bg, disparity=bg_disp, occupancy=~disc),
                Layer(rgba=fg, disparity=fg_disp, occupancy=disc)],
        intrinsics=intrinsics,
        source_dims=(h, w),
    )
    return mpi, disc


@pytest.fixture
def two_layer_mpi():
    return make_two_layer_mpi()


def write_scene(dir_path, h=64, w=80, **kw):
    """Materialize a disc scene as image.png + depth.png inside dir_path.
    Returns (image_path, depth_path, disc_mask)."""
    from pathlib import Path

    from PIL import Image

    from adaptive_mpi.depthprep import save_disparity

    dir_path = Path(dir_path)
    dir_path.mkdir(parents=True, exist_ok=True)
    rgb, d, disc = make_disc_scene(h=h, w=w, **kw)
    img_path = dir_path / "image.png"
    depth_path = dir_path / "depth.png"
    q = np.clip(np.floor(rgb * 255.0 + 0.5), 0, 255).astype(np.uint8)
    Image.fromarray(q).save(img_path)
    save_disparity(d, depth_path)
    return img_path, depth_path, disc
