import numpy as np
import pytest

from adaptive_mpi import inpaint
from adaptive_mpi.errors import DegenerateInputError, InvalidArgumentError
from adaptive_mpi.inpaint import InpaintTask

from conftest import make_two_layer_mpi


class TestScaledBand:
    def test_reference_resolution(self):
        assert inpaint.scaled_band(40, (768, 1024)) == 40

    def test_half_resolution(self):
        assert inpaint.scaled_band(40, (384, 512)) == 20

    def test_floor_of_one(self):
        assert inpaint.scaled_band(40, (4, 4)) == 1


class TestAccumulateBackground:
    def test_farthest_layer_is_itself(self, two_layer_mpi):
        mpi, disc = two_layer_mpi
        acc = inpaint.accumulate_background(mpi, 0)
        np.testing.assert_array_equal(acc[..., 3] > 0.5, ~disc)
        np.testing.assert_array_equal(acc[..., :3][~disc], mpi.layers[0].rgba[..., :3][~disc])

    def test_full_stack_covers_frame(self, two_layer_mpi):
        mpi, disc = two_layer_mpi
        acc = inpaint.accumulate_background(mpi, 1)
        assert (acc[..., 3] > 0.5).all()
        # nearest occupied layer wins per pixel
        np.testing.assert_array_equal(acc[..., :3][disc], mpi.layers[1].rgba[..., :3][disc])

    def test_out_of_range_rejected(self, two_layer_mpi):
        mpi, _ = two_layer_mpi
        with pytest.raises(InvalidArgumentError):
            inpaint.accumulate_background(mpi, 2)


class TestInferenceMask:
    def test_band_geometry(self, two_layer_mpi):
        mpi, disc = two_layer_mpi
        acc = inpaint.accumulate_background(mpi, 0)
        mask = inpaint.make_inference_mask(acc, disc, band_px=3)
        known = ~disc
        assert mask.any()
        assert not (mask & known).any()  # never overwrites known pixels
        assert (mask <= disc).all()  # only occluded pixels
        # contained in the 3-step dilation ring of the known region
        from adaptive_mpi import imagecore

        ring = imagecore.morph(known, "dilate", 3, 3) & ~known
        assert (mask <= ring).all()

    def test_wide_band_fills_whole_hole(self, two_layer_mpi):
        mpi, disc = two_layer_mpi
        acc = inpaint.accumulate_background(mpi, 0)
        mask = inpaint.make_inference_mask(acc, disc, band_px=40)
        np.testing.assert_array_equal(mask, disc)

    def test_shape_mismatch_rejected(self, two_layer_mpi):
        mpi, disc = two_layer_mpi
        acc = inpaint.accumulate_background(mpi, 0)
        with pytest.raises(InvalidArgumentError):
            inpaint.make_inference_mask(acc, disc[:-1], band_px=2)


class TestTrainingPair:
    def test_ring_mask_and_target(self, two_layer_mpi):
        mpi, disc = two_layer_mpi
        pair = inpaint.make_training_pair(mpi.layers[1].rgba, band_px=3)
        occ = mpi.layers[1].rgba[..., 3] > 0.5
        inner = pair.input_rgba[..., 3] > 0.5
        assert (inner <= occ).all() and inner.any()
        np.testing.assert_array_equal(pair.mask, occ & ~inner)
        np.testing.assert_array_equal(pair.target, mpi.layers[1].rgba)

    def test_overlarge_band_rejected(self, two_layer_mpi):
        mpi, _ = two_layer_mpi
        with pytest.raises(DegenerateInputError):
            inpaint.make_training_pair(mpi.layers[1].rgba, band_px=200)


class TestDiffuseFill:
    def test_constant_boundary_fills_constant(self):
        rgba = np.zeros((16, 16, 4))
        rgba[..., :3] = 0.6
        rgba[..., 3] = 1.0
        hole = np.zeros((16, 16), dtype=bool)
        hole[6:10, 6:10] = True
        rgba[..., 3][hole] = 0.0
        out = inpaint.diffuse_fill(InpaintTask(rgba, hole, 0))
        np.testing.assert_allclose(out[..., :3][hole], 0.6, atol=1e-3)
        assert (out[..., 3][hole] == 1.0).all()

    def test_linear_profile_is_harmonic_fixpoint(self):
        # a linear ramp satisfies the discrete Laplace equation exactly
        h, w = 12, 24
        ramp = np.tile(np.linspace(0.0, 1.0, w), (h, 1))
        rgba = np.zeros((h, w, 4))
        rgba[..., :3] = ramp[..., None]
        rgba[..., 3] = 1.0
        hole = np.zeros((h, w), dtype=bool)
        hole[4:8, 8:16] = True
        rgba[..., 3][hole] = 0.0
        out = inpaint.diffuse_fill(InpaintTask(rgba, hole, 0), max_iters=20000, tol=1e-9)
        np.testing.assert_allclose(out[..., 0][hole], ramp[hole], atol=1e-3)

    def test_known_pixels_untouched_bit_exact(self, rng):
        rgba = np.zeros((20, 20, 4))
        rgba[..., :3] = rng.random((20, 20, 3))
        rgba[..., 3] = 1.0
        hole = np.zeros((20, 20), dtype=bool)
        hole[5:9, 5:9] = True
        rgba[..., 3][hole] = 0.0
        before = rgba.copy()
        out = inpaint.diffuse_fill(InpaintTask(rgba, hole, 0))
        assert np.array_equal(out[..., :3][~hole], before[..., :3][~hole])

    def test_maximum_principle(self, rng):
        rgba = np.zeros((24, 24, 4))
        rgba[..., :3] = 0.2 + 0.6 * rng.random((24, 24, 3))
        rgba[..., 3] = 1.0
        hole = np.zeros((24, 24), dtype=bool)
        hole[8:16, 8:16] = True
        rgba[..., 3][hole] = 0.0
        out = inpaint.diffuse_fill(InpaintTask(rgba, hole, 0))
        known = ~hole
        lo = rgba[..., :3][known].min()
        hi = rgba[..., :3][known].max()
        assert out[..., :3][hole].min() >= lo - 1e-9
        assert out[..., :3][hole].max() <= hi + 1e-9

    def test_orphan_component_gets_mean_color(self):
        # known pixels only in the left half; an isolated fill island on the
        # right never touches them
        rgba = np.zeros((10, 20, 4))
        rgba[..., 0] = 0.8
        rgba[:, :5, 3] = 1.0
        island = np.zeros((10, 20), dtype=bool)
        island[4:6, 15:18] = True
        out = inpaint.diffuse_fill(InpaintTask(rgba, island, 0))
        np.testing.assert_allclose(out[..., 0][island], 0.8)
        np.testing.assert_allclose(out[..., 1][island], 0.0)

    def test_empty_mask_is_identity(self, rng):
        rgba = np.zeros((8, 8, 4))
        rgba[..., :3] = rng.random((8, 8, 3))
        rgba[..., 3] = 1.0
        out = inpaint.diffuse_fill(InpaintTask(rgba, np.zeros((8, 8), dtype=bool), 0))
        assert np.array_equal(out, rgba)

    def test_no_known_pixels_rejected(self):
        rgba = np.zeros((8, 8, 4))
        with pytest.raises(InvalidArgumentError):
            inpaint.diffuse_fill(InpaintTask(rgba, np.ones((8, 8), dtype=bool), 0))


class TestInpaintMpi:
    def test_nearest_layer_untouched(self, two_layer_mpi):
        mpi, _ = two_layer_mpi
        out = inpaint.inpaint_mpi(mpi, band_px=24)
        assert np.array_equal(out.layers[-1].rgba, mpi.layers[-1].rgba)

    def test_background_alpha_grows_into_hole(self, two_layer_mpi):
        mpi, disc = two_layer_mpi
        out = inpaint.inpaint_mpi(mpi, band_px=24)
        bg_alpha = out.layers[0].rgba[..., 3] > 0.5
        assert (bg_alpha | disc).all() and bg_alpha[disc].any()

    def test_original_content_bit_exact(self, two_layer_mpi):
        mpi, disc = two_layer_mpi
        out = inpaint.inpaint_mpi(mpi, band_px=24)
        keep = ~disc
        assert np.array_equal(out.layers[0].rgba[keep], mpi.layers[0].rgba[keep])

    def test_occupancy_preserved(self, two_layer_mpi):
        mpi, disc = two_layer_mpi
        out = inpaint.inpaint_mpi(mpi, band_px=24)
        for a, b in zip(out.layers, mpi.layers):
            assert np.array_equal(a.occupancy, b.occupancy)

    def test_idempotent(self, two_layer_mpi):
        mpi, _ = two_layer_mpi
        once = inpaint.inpaint_mpi(mpi, band_px=24)
        twice = inpaint.inpaint_mpi(once, band_px=24)
        for a, b in zip(once.layers, twice.layers):
            assert np.array_equal(a.rgba, b.rgba)

    def test_single_layer_is_noop(self, two_layer_mpi):
        from adaptive_mpi.slicer import AdaptiveMpi

        mpi, _ = two_layer_mpi
        solo = AdaptiveMpi(layers=[mpi.layers[0]], intrinsics=mpi.intrinsics,
                           source_dims=mpi.source_dims)
        out = inpaint.inpaint_mpi(solo, band_px=24)
        assert np.array_equal(out.layers[0].rgba, solo.layers[0].rgba)


class TestExportTrainingPairs:
    def test_files_and_index(self, tmp_path):
        mpi, _ = make_two_layer_mpi()
        index = inpaint.export_training_pairs(mpi, tmp_path, count=4, band_px=16, seed=3)
        assert len(index) == 4
        import json

        with open(tmp_path / "index.json") as f:
            meta = json.load(f)
        assert meta["seed"] == 3
        assert len(meta["pairs"]) == 4
        for entry in meta["pairs"]:
            for key in ("input", "mask", "target"):
                assert (tmp_path / entry[key]).is_file()

    def test_seed_reproducible(self, tmp_path):
        mpi, _ = make_two_layer_mpi()
        a = inpaint.export_training_pairs(mpi, tmp_path / "a", count=3, band_px=16, seed=7)
        b = inpaint.export_training_pairs(mpi, tmp_path / "b", count=3, band_px=16, seed=7)
        assert [e["layer_index"] for e in a] == [e["layer_index"] for e in b]
