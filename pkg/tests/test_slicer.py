import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptive_mpi import depthprep, slicer
from adaptive_mpi.depthprep import DisparityMap
from adaptive_mpi.errors import DegenerateInputError, InvalidArgumentError
from adaptive_mpi.slicer import SlicingConfig

from conftest import make_disc_scene


class TestHistogram:
    def test_single_value_mass(self):
        q = np.full((4, 4), 7, dtype=np.int32)
        h = slicer.histogram(q)
        assert h[7] == 1.0 and h.sum() == 1.0

    def test_two_value_split(self):
        q = np.zeros((4, 4), dtype=np.int32)
        q[:, 2:] = 255
        h = slicer.histogram(q)
        assert h[0] == 0.5 and h[255] == 0.5

    def test_exclusion_renormalizes(self):
        q = np.zeros((4, 4), dtype=np.int32)
        q[:, 2:] = 255
        h = slicer.histogram(q, exclude=q == 0)
        assert h[255] == 1.0

    def test_all_excluded_rejected(self):
        q = np.zeros((4, 4), dtype=np.int32)
        with pytest.raises(DegenerateInputError):
            slicer.histogram(q, exclude=np.ones((4, 4), dtype=bool))


class TestTransitionIndex:
    def test_uniform_histogram_is_zero(self):
        h = np.full(256, 1.0 / 256)
        np.testing.assert_allclose(slicer.transition_index(h), 0.0, atol=1e-12)

    def test_spike_neighbors_hit_epsilon_floor(self):
        h = np.zeros(256)
        h[100] = 0.5
        h[200] = 0.5
        t = slicer.transition_index(h)
        # at bin 99: lap = 0 - 0 + 0.5, denominator floored at 0.001
        assert t[99] == pytest.approx(500.0)

    def test_always_finite(self, rng):
        h = rng.random(256)
        h /= h.sum()
        assert np.isfinite(slicer.transition_index(h)).all()


class TestSelectTransitions:
    def test_all_zero_gives_boundaries_only(self):
        assert slicer.select_transitions(np.zeros(256), 16) == [0, 255]

    def test_neighbor_suppression(self):
        t = np.zeros(256)
        t[50] = 5.0
        t[55] = 3.0
        assert slicer.select_transitions(t, 16, xi=8) == [0, 50, 255]

    def test_flat_low_density_valley_gets_no_transition(self):
        # mass only near bins 40 and 150; the valley between 46 and 141 has a
        # zero Laplacian so nothing is selected strictly inside it
        h = np.zeros(256)
        h[38:46] = 1.0
        h[142:155] = 1.0
        h /= h.sum()
        t = slicer.transition_index(h)
        picks = [p for p in slicer.select_transitions(t, 16) if p not in (0, 255)]
        assert picks  # boundaries of the clusters are found
        assert not any(46 < p < 141 for p in picks)

    def test_interior_spacing_exceeds_xi(self, rng):
        t = rng.random(256) * 5
        picks = [p for p in slicer.select_transitions(t, 16, xi=8) if p not in (0, 255)]
        diffs = np.diff(sorted(picks))
        assert (diffs > 8).all()

    def test_plane_count_bound(self, rng):
        t = rng.random(256) * 5
        for max_planes in (1, 2, 4, 16):
            trans = slicer.select_transitions(t, max_planes)
            assert len(trans) <= max_planes + 1
        assert slicer.select_transitions(t, 1) == [0, 255]


def scene_fixture(**kw):
    rgb, d, disc = make_disc_scene(**kw)
    pre = depthprep.preprocess(d)
    return rgb, d, disc, pre


class TestSlice:
    def test_bimodal_disc_two_layers(self):
        rgb, d, disc, pre = scene_fixture(fg_disp=0.9, bg_disp=0.1)
        plan, mpi = slicer.slice_adaptive(rgb, pre, d, SlicingConfig(max_planes=4))
        assert plan.layer_count == 2
        assert len(mpi.layers) == 2
        # the single surviving transition separates the two quantized modes
        fg_bins = pre.quantized[disc & ~pre.edge_band]
        bg_bins = pre.quantized[~disc & ~pre.edge_band]
        lo, hi = bg_bins.max(), fg_bins.min()
        interior = [t for t in plan.transitions if t not in (0, 255)]
        assert len(interior) == 1 and lo < interior[0] <= hi
        # foreground occupancy matches the disc
        np.testing.assert_array_equal(mpi.layers[1].occupancy, disc)

    def test_smooth_ramp_below_thresholds_single_layer(self, rng):
        # gentle gradient: no Canny response, flat histogram, no transitions
        h, w = 32, 256
        disp = np.tile(np.linspace(0.3, 0.7, w), (h, 1))
        d = DisparityMap(values=disp, valid=np.ones((h, w), dtype=bool))
        pre = depthprep.preprocess(d)
        rgb = rng.random((h, w, 3))
        plan, mpi = slicer.slice_adaptive(rgb, pre, d)
        assert plan.layer_count == 1
        assert mpi.layers[0].occupancy.all()
        assert plan.plane_disparities[0] == pytest.approx(
            depthprep.normalize_unit(d).mean())

    def test_partition_property(self):
        rgb, d, disc, pre = scene_fixture(noise=0.05)
        _, mpi = slicer.slice_adaptive(rgb, pre, d)
        total = sum(int(l.occupancy.sum()) for l in mpi.layers)
        assert total == rgb.shape[0] * rgb.shape[1]
        union = np.zeros(rgb.shape[:2], dtype=bool)
        for layer in mpi.layers:
            assert not (union & layer.occupancy).any()  # pairwise disjoint
            union |= layer.occupancy
        assert union.all()

    def test_alpha_equals_occupancy(self):
        rgb, d, disc, pre = scene_fixture()
        _, mpi = slicer.slice_adaptive(rgb, pre, d)
        for layer in mpi.layers:
            np.testing.assert_array_equal(layer.rgba[..., 3] > 0.5, layer.occupancy)

    def test_monotone_plane_disparities(self):
        rgb, d, disc, pre = scene_fixture(noise=0.05)
        plan, _ = slicer.slice_adaptive(rgb, pre, d)
        assert (np.diff(plan.plane_disparities) > 0).all()

    def test_scale_invariance(self):
        rgb, d, disc, pre = scene_fixture()
        plan_a, mpi_a = slicer.slice_adaptive(rgb, pre, d)
        d2 = DisparityMap(values=d.values * 3.5, valid=d.valid)
        pre2 = depthprep.preprocess(d2)
        plan_b, mpi_b = slicer.slice_adaptive(rgb, pre2, d2)
        assert plan_a.transitions == plan_b.transitions
        for la, lb in zip(mpi_a.layers, mpi_b.layers):
            np.testing.assert_array_equal(la.occupancy, lb.occupancy)
        # normalization absorbs the scaling of the plane placement
        np.testing.assert_allclose(plan_a.plane_disparities, plan_b.plane_disparities)

    def test_determinism(self):
        rgb, d, disc, pre = scene_fixture(noise=0.03)
        plan_a, mpi_a = slicer.slice_adaptive(rgb, pre, d)
        plan_b, mpi_b = slicer.slice_adaptive(rgb, pre, d)
        assert plan_a.transitions == plan_b.transitions
        for la, lb in zip(mpi_a.layers, mpi_b.layers):
            assert np.array_equal(la.rgba, lb.rgba)

    def test_dimension_mismatch_rejected(self):
        rgb, d, disc, pre = scene_fixture()
        with pytest.raises(InvalidArgumentError):
            slicer.slice_adaptive(rgb[:-2], pre, d)


class TestSliceUniform:
    def test_transition_arithmetic(self):
        rgb, d, disc, pre = scene_fixture(noise=0.05)
        plan, _ = slicer.slice_uniform(rgb, pre, d, 4)
        # pre-merge boundaries are floor(255*j/4); empties may be merged away
        assert set(plan.transitions) <= {0, 63, 127, 191, 255}

    def test_single_plane_matches_adaptive_degenerate(self, rng):
        h, w = 32, 256
        disp = np.tile(np.linspace(0.3, 0.7, w), (h, 1))
        d = DisparityMap(values=disp, valid=np.ones((h, w), dtype=bool))
        pre = depthprep.preprocess(d)
        rgb = rng.random((h, w, 3))
        plan_u, mpi_u = slicer.slice_uniform(rgb, pre, d, 1)
        plan_a, mpi_a = slicer.slice_adaptive(rgb, pre, d, SlicingConfig(max_planes=1))
        assert plan_u.transitions == plan_a.transitions == [0, 255]
        np.testing.assert_array_equal(mpi_u.layers[0].rgba, mpi_a.layers[0].rgba)

    def test_equal_plane_count_protocol(self):
        rgb, d, disc, pre = scene_fixture()
        plan_a, _ = slicer.slice_adaptive(rgb, pre, d, SlicingConfig(max_planes=8))
        plan_u, _ = slicer.slice_uniform(rgb, pre, d, plan_a.layer_count)
        assert plan_u.layer_count <= plan_a.layer_count

    def test_invalid_plane_count(self):
        rgb, d, disc, pre = scene_fixture()
        with pytest.raises(InvalidArgumentError):
            slicer.slice_uniform(rgb, pre, d, 0)
