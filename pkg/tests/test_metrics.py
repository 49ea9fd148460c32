"""CNR: forced-arithmetic example, invariances, region geometry, curves."""

import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from qld import (
    DegenerateBackgroundError,
    DemodConfig,
    NoiseSpec,
    Rect,
    RegionSpec,
    auto_background,
    cnr,
    cnr_curve,
    curve_to_csv,
    make_beacon_scene,
    scene_stream,
)

CHECKER_A = np.array([[5, 1, 5], [1, 5, 1], [5, 1, 5]], dtype=float)  # five 5s, four 1s
CHECKER_B = np.array([[1, 5, 1], [5, 1, 5], [1, 5, 1]], dtype=float)  # four 5s, five 1s


def forced_arithmetic_image():
    """Object 3x3 of 7s; background 36 pixels, half 5s half 1s.

    Means are 7 and 3, the background deviations are all +-2, so the
    denominator is exactly 2 and CNR is exactly 2.0.
    """
    image = np.zeros((12, 12))
    object_rect = Rect(4, 4, 3, 3)
    image[object_rect.slices()] = 7.0
    blocks = (Rect(0, 0, 3, 3), Rect(9, 0, 3, 3), Rect(0, 9, 3, 3), Rect(9, 9, 3, 3))
    for i, block in enumerate(blocks):
        image[block.slices()] = CHECKER_A if i % 2 == 0 else CHECKER_B
    return image, RegionSpec(object_rect=object_rect, background_blocks=blocks)


class TestCnr:
    def test_forced_arithmetic_case(self):
        image, regions = forced_arithmetic_image()
        report = cnr(image, regions)
        assert report.cnr == 2.0
        assert report.object_mean == 7.0
        assert report.background_mean == 3.0
        assert report.background_std == 2.0
        assert report.object_pixels == 9
        assert report.background_pixels == 36

    def test_object_at_background_mean_gives_zero(self):
        image, regions = forced_arithmetic_image()
        image[regions.object_rect.slices()] = 3.0
        assert cnr(image, regions).cnr == 0.0

    def test_population_variance_form(self):
        # two background pixels {1, 3}: population std is 1, not sqrt(2)
        image = np.array([[5.0, 1.0, 3.0]])
        regions = RegionSpec(object_rect=Rect(0, 0, 1, 1),
                             background_blocks=(Rect(1, 0, 2, 1),))
        report = cnr(image, regions)
        assert report.background_std == 1.0
        assert report.cnr == 3.0

    def test_degenerate_background_is_error_not_infinity(self):
        image = np.zeros((12, 12))
        image[4:7, 4:7] = 9.0
        regions = auto_background(Rect(4, 4, 3, 3))
        with pytest.raises(DegenerateBackgroundError, match="degenerate"):
            cnr(image, regions)

    def test_identity_connecting_fields(self):
        rng = np.random.default_rng(0)
        image = rng.normal(50.0, 10.0, size=(12, 12))
        report = cnr(image, auto_background(Rect(4, 4, 3, 3)))
        assert report.cnr * report.background_std == pytest.approx(
            report.object_mean - report.background_mean, rel=1e-12
        )

    @settings(max_examples=60, deadline=None)
    @given(
        alpha=st.floats(min_value=1e-3, max_value=1e3),
        beta=st.floats(min_value=-1e3, max_value=1e3),
    )
    def test_affine_invariance(self, alpha, beta):
        rng = np.random.default_rng(42)
        image = rng.uniform(0.0, 100.0, size=(12, 12))
        regions = auto_background(Rect(4, 4, 3, 3))
        base = cnr(image, regions).cnr
        scaled = cnr(alpha * image + beta, regions).cnr
        assert scaled == pytest.approx(base, abs=1e-9)

    def test_sign_flips_when_object_darker(self):
        image, regions = forced_arithmetic_image()
        reflected = 8.0 - image  # swaps bright object for dark, same spread
        report = cnr(reflected, regions)
        assert report.cnr == pytest.approx(-2.0, rel=1e-12)
        assert report.background_std == pytest.approx(2.0, rel=1e-12)

    def test_negative_cnr_representable(self):
        # alternating checker blocks keep the background mean exactly 10, std 2
        image = np.full((12, 12), 10.0)
        regions = auto_background(Rect(4, 4, 3, 3))
        for i, block in enumerate(regions.background_blocks):
            image[block.slices()] += (CHECKER_A if i % 2 == 0 else CHECKER_B) - 3.0
        image[regions.object_rect.slices()] = 9.4
        assert cnr(image, regions).cnr == pytest.approx(-0.3, rel=1e-9)

    def test_pixel_counts_match_geometric_areas(self):
        regions = RegionSpec(
            object_rect=Rect(2, 2, 2, 3),
            background_blocks=(Rect(6, 2, 2, 3), Rect(2, 7, 4, 2)),
        )
        rng = np.random.default_rng(1)
        report = cnr(rng.uniform(0, 1, (16, 16)), regions)
        assert report.object_pixels == 6
        assert report.background_pixels == 6 + 8

    def test_bounds_checked_against_image(self):
        image = np.ones((8, 8))
        regions = auto_background(Rect(4, 4, 3, 3))  # blocks reach x,y = 7..9
        with pytest.raises(ValueError, match="bounds"):
            cnr(image, regions)


class TestRegionSpec:
    def test_object_overlap_rejected(self):
        with pytest.raises(ValueError, match="overlaps"):
            RegionSpec(object_rect=Rect(4, 4, 3, 3),
                       background_blocks=(Rect(5, 5, 3, 3),))

    def test_block_overlap_rejected(self):
        with pytest.raises(ValueError, match="overlap"):
            RegionSpec(object_rect=Rect(0, 0, 2, 2),
                       background_blocks=(Rect(4, 4, 3, 3), Rect(5, 5, 3, 3)))

    def test_minimum_background_pixels(self):
        with pytest.raises(ValueError, match="2 pixels"):
            RegionSpec(object_rect=Rect(0, 0, 2, 2),
                       background_blocks=(Rect(4, 4, 1, 1),))

    def test_auto_background_layout(self):
        regions = auto_background(Rect(6, 9, 3, 3))
        assert regions.object_rect == Rect(6, 9, 3, 3)
        assert len(regions.background_blocks) == 8
        expected = {
            (3, 6), (6, 6), (9, 6),
            (3, 9), (9, 9),
            (3, 12), (6, 12), (9, 12),
        }
        assert {(b.x, b.y) for b in regions.background_blocks} == expected
        assert all(b.w == 3 and b.h == 3 for b in regions.background_blocks)

    def test_auto_background_near_origin_rejected(self):
        with pytest.raises(ValueError, match="8-block"):
            auto_background(Rect(1, 5, 3, 3))


def beacon_with_noise(seed, cycles=120):
    return make_beacon_scene(
        width=24, height=24, frame_rate=221.0, frame_count=cycles * 17,
        frequency=13.0, beacon_rect=Rect(10, 10, 3, 3),
        beacon_amplitude=50.0, ambient=20.0,
        noise=NoiseSpec.uniform(0.0, 200.0, seed=seed),
    )


class TestCnrCurve:
    def test_noiseless_scene_degenerate_at_every_snapshot(self):
        spec = make_beacon_scene(
            width=24, height=24, frame_rate=221.0, frame_count=3 * 17,
            frequency=13.0, beacon_rect=Rect(10, 10, 3, 3), beacon_amplitude=50.0,
        )
        regions = auto_background(Rect(10, 10, 3, 3))
        points = cnr_curve(scene_stream(spec), DemodConfig(13.0, 221.0), regions, cadence=17)
        assert len(points) == 3
        for point in points:
            assert point.degenerate
            assert math.isnan(point.cnr)
            assert point.background_std == 0.0

    def test_noisy_beacon_curve_rises(self):
        # Monte-Carlo oracle over 10 seeds: increasing trend, >5x growth
        regions = auto_background(Rect(10, 10, 3, 3))
        config = DemodConfig(13.0, 221.0)
        for seed in range(10):
            stream = scene_stream(beacon_with_noise(seed))
            points = cnr_curve(stream, config, regions, cadence=17)
            values = np.array([p.cnr for p in points])
            assert not np.isnan(values).any()
            rho = stats.spearmanr(np.arange(len(values)), values).statistic
            assert rho >= 0.8
            assert values[-1] > 5.0 * values[0]

    def test_cycles_axis(self):
        stream = scene_stream(beacon_with_noise(0, cycles=4))
        points = cnr_curve(stream, DemodConfig(13.0, 221.0),
                           auto_background(Rect(10, 10, 3, 3)), cadence=17)
        assert [p.frames for p in points] == [17, 34, 51, 68]
        assert [p.cycles for p in points] == [pytest.approx(k * 17 * 13 / 221) for k in (1, 2, 3, 4)]

    def test_same_seed_identical_curves(self):
        regions = auto_background(Rect(10, 10, 3, 3))
        config = DemodConfig(13.0, 221.0)
        first = cnr_curve(scene_stream(beacon_with_noise(5, cycles=10)), config, regions, 17)
        second = cnr_curve(scene_stream(beacon_with_noise(5, cycles=10)), config, regions, 17)
        assert first == second

    def test_csv_serialization(self):
        stream = scene_stream(beacon_with_noise(1, cycles=3))
        points = cnr_curve(stream, DemodConfig(13.0, 221.0),
                           auto_background(Rect(10, 10, 3, 3)), cadence=17)
        buffer = io.StringIO()
        curve_to_csv(points, buffer)
        lines = buffer.getvalue().splitlines()
        assert lines[0] == "cycles,frames,cnr,object_mean,background_mean,background_std"
        assert len(lines) == 1 + len(points)
        cells = lines[1].split(",")
        assert int(cells[1]) == 17
        assert float(cells[2]) == pytest.approx(points[0].cnr)
