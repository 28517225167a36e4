import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from adaptive_mpi.service import create_app

from conftest import write_scene


@pytest.fixture
def workspace(tmp_path):
    write_scene(tmp_path / "scene")
    return tmp_path


@pytest.fixture
def client(workspace):
    return TestClient(create_app(workspace))


class TestHealth:
    def test_reports_workspace(self, client, workspace):
        r = client.get("/health")
        assert r.status_code == 200
        body = r.json()
        assert body["status"] == "ok"
        assert body["workspace"] == str(workspace.resolve())


class TestSliceEndpoint:
    def test_slice_and_fetch_container(self, client, workspace):
        r = client.post("/slice", json={
            "image": "scene/image.png", "depth": "scene/depth.png", "out": "mpi"})
        assert r.status_code == 200, r.text
        body = r.json()
        assert body["layer_count"] >= 1
        assert body["transitions"][0] == 0 and body["transitions"][-1] == 255
        assert (workspace / "mpi" / "manifest.json").is_file()
        # static mount serves the container to the browser viewer
        m = client.get("/files/mpi/manifest.json")
        assert m.status_code == 200
        manifest = m.json()
        layer = client.get(f"/files/mpi/{manifest['layers'][0]['file']}")
        assert layer.status_code == 200
        assert layer.headers["content-type"] == "image/png"

    def test_config_overrides(self, client):
        r = client.post("/slice", json={
            "image": "scene/image.png", "depth": "scene/depth.png", "out": "mpi2",
            "uniform": 4, "config": {"parallax_scale": 0.5}})
        assert r.status_code == 200

    def test_unknown_config_key_422(self, client):
        r = client.post("/slice", json={
            "image": "scene/image.png", "depth": "scene/depth.png", "out": "m",
            "config": {"bogus": 1}})
        assert r.status_code == 422

    def test_missing_file_404(self, client):
        r = client.post("/slice", json={
            "image": "scene/missing.png", "depth": "scene/depth.png", "out": "m"})
        assert r.status_code == 404

    def test_workspace_escape_400(self, client):
        r = client.post("/slice", json={
            "image": "../../etc/passwd", "depth": "scene/depth.png", "out": "m"})
        assert r.status_code == 400


class TestStageChain:
    def test_inpaint_render_eval(self, client, workspace):
        assert client.post("/slice", json={
            "image": "scene/image.png", "depth": "scene/depth.png",
            "out": "mpi"}).status_code == 200

        r = client.post("/inpaint", json={
            "container_in": "mpi", "container_out": "filled",
            "config": {"band_px": 16}})
        assert r.status_code == 200
        assert r.json()["container"] == "filled"

        r = client.post("/render", json={
            "container": "filled", "out": "frames",
            "config": {"frames": 2, "trajectory": "swing"}})
        assert r.status_code == 200
        assert r.json()["frame_count"] == 2
        assert (workspace / "frames" / "frame_00001.png").is_file()

        (workspace / "eval.json").write_text(json.dumps({
            "view_pairs": [{"pred": "frames/frame_00000.png",
                            "gt": "scene/image.png", "name": "id"}]}))
        r = client.post("/eval", json={"manifest": "eval.json", "out": "report"})
        assert r.status_code == 200
        rows = r.json()
        assert rows[0]["kind"] == "view" and rows[0]["ssim"] > 0.99
        assert rows[0]["delta_1"] is None  # depth fields absent for view rows

    def test_corrupt_container_422(self, client, workspace):
        bad = workspace / "bad"
        bad.mkdir()
        (bad / "manifest.json").write_text("{oops")
        r = client.post("/render", json={"container": "bad", "out": "frames"})
        assert r.status_code == 422


class TestFuseEndpoint:
    def test_fuse(self, client, workspace):
        from adaptive_mpi.depthprep import DisparityMap, save_disparity

        rng = np.random.default_rng(9)
        for i in range(3):
            vals = rng.random((16, 20)) + 0.1
            save_disparity(DisparityMap(values=vals, valid=np.ones((16, 20), bool)),
                           workspace / f"d{i}.pfm")
        r = client.post("/fuse", json={
            "depth_files": ["d0.pfm", "d1.pfm", "d2.pfm"], "flipped": [2],
            "out": "fused.pfm"})
        assert r.status_code == 200
        body = r.json()
        assert (body["height"], body["width"]) == (16, 20)
        assert (workspace / "fused.pfm").is_file()

    def test_empty_ensemble_400(self, client):
        r = client.post("/fuse", json={"depth_files": [], "out": "f.pfm"})
        assert r.status_code == 400
