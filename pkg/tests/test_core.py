"""Core types: phase convention, invariants, validation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qld import (
    DemodConfig,
    Frame,
    FrameStream,
    Normalization,
    PhasorAccumulator,
    Rect,
    StreamHeader,
    sample_phase,
    wrap_phase,
)


class TestSamplePhase:
    def test_zero_ordinal(self):
        config = DemodConfig(frequency=13.0, frame_rate=221.0)
        assert sample_phase(config, 0) == 0.0

    def test_full_cycle_reduces_to_zero(self):
        # 13/221 = 1/17: frame 17 completes exactly one cycle
        config = DemodConfig(frequency=13.0, frame_rate=221.0)
        assert sample_phase(config, 17) == 0.0

    def test_symmetric_case(self):
        config = DemodConfig(frequency=17.0, frame_rate=221.0)
        assert sample_phase(config, 13) == 0.0

    def test_phase_origin_shifts(self):
        config = DemodConfig(frequency=13.0, frame_rate=221.0, phase_origin=1.0)
        assert sample_phase(config, 0) == pytest.approx(1.0, abs=1e-15)
        assert sample_phase(config, 17) == pytest.approx(1.0, abs=1e-12)

    def test_result_in_half_open_interval(self):
        config = DemodConfig(frequency=13.7, frame_rate=97.0, phase_origin=2.5)
        for n in range(0, 5000, 37):
            phi = sample_phase(config, n)
            assert -math.pi < phi <= math.pi

    def test_negative_ordinal_rejected(self):
        config = DemodConfig(frequency=13.0, frame_rate=221.0)
        with pytest.raises(ValueError):
            sample_phase(config, -1)

    @settings(max_examples=200, deadline=None)
    @given(
        period=st.integers(min_value=3, max_value=400),
        frequency=st.floats(min_value=0.01, max_value=500.0,
                            allow_nan=False, allow_infinity=False),
        k=st.integers(min_value=0, max_value=10_000),
    )
    def test_periodicity_over_integer_periods(self, period, frequency, k):
        # P = frame_rate/frequency integer by construction; keep n*P < 1e7
        n = min(k, int(1e7) // period)
        config = DemodConfig(frequency=frequency, frame_rate=frequency * period)
        delta = wrap_phase(sample_phase(config, n + period) - sample_phase(config, n))
        assert abs(delta) <= 1e-9


class TestWrapPhase:
    def test_boundaries(self):
        assert wrap_phase(math.pi) == math.pi
        assert wrap_phase(-math.pi) == math.pi
        assert wrap_phase(0.0) == 0.0
        assert wrap_phase(3 * math.pi) == pytest.approx(math.pi, abs=1e-12)

    def test_interval(self):
        for phi in np.linspace(-50.0, 50.0, 1001):
            w = wrap_phase(float(phi))
            assert -math.pi < w <= math.pi


class TestDemodConfig:
    def test_nyquist_rejected_with_bound_in_message(self):
        with pytest.raises(ValueError, match="110.5"):
            DemodConfig(frequency=110.5, frame_rate=221.0)
        with pytest.raises(ValueError, match="Nyquist"):
            DemodConfig(frequency=200.0, frame_rate=221.0)

    def test_just_below_nyquist_ok(self):
        DemodConfig(frequency=110.4, frame_rate=221.0)

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            DemodConfig(frequency=0.0, frame_rate=221.0)
        with pytest.raises(ValueError):
            DemodConfig(frequency=13.0, frame_rate=0.0)

    def test_frames_per_cycle(self):
        assert DemodConfig(13.0, 221.0).frames_per_cycle == 17
        assert DemodConfig(17.0, 221.0).frames_per_cycle == 13


class TestFrame:
    def test_negative_pixels_rejected(self):
        with pytest.raises(ValueError, match="negative"):
            Frame(index=0, pixels=np.array([[1.0, -0.5]]))

    def test_wrong_rank_rejected(self):
        with pytest.raises(ValueError):
            Frame(index=0, pixels=np.zeros(4))

    def test_negative_index_rejected(self):
        with pytest.raises(ValueError):
            Frame(index=-1, pixels=np.zeros((2, 2)))

    def test_geometry(self):
        frame = Frame(index=3, pixels=np.zeros((4, 6)))
        assert frame.width == 6
        assert frame.height == 4
        assert frame.pixels.size == frame.width * frame.height


class TestStreamHeader:
    def test_valid(self):
        h = StreamHeader(width=600, height=600, frame_count=10140, frame_rate=390.0)
        assert h.bit_depth == 16

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"width": 0, "height": 1, "frame_count": 1, "frame_rate": 1.0},
            {"width": 1, "height": 1, "frame_count": 0, "frame_rate": 1.0},
            {"width": 1, "height": 1, "frame_count": 1, "frame_rate": 0.0},
            {"width": 1, "height": 1, "frame_count": 1, "frame_rate": 1.0, "bit_depth": 12},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            StreamHeader(**kwargs)


class TestZeroFrameAccumulator:
    @pytest.mark.parametrize("norm", [Normalization.RAW_SUMS, Normalization.TWO_OVER_N])
    def test_finalizes_to_all_zero(self, norm):
        config = DemodConfig(frequency=13.0, frame_rate=221.0, normalization=norm)
        acc = PhasorAccumulator(5, 4, config)
        assert np.all(acc.x_sum == 0.0)
        assert np.all(acc.y_sum == 0.0)
        image = acc.finalize()
        assert image.frames_used == 0
        assert np.all(image.amplitude == 0.0)
        assert np.all(image.phase == 0.0)


class TestRect:
    def test_parse(self):
        assert Rect.parse("1,2,3,4") == Rect(1, 2, 3, 4)

    def test_parse_rejects(self):
        with pytest.raises(ValueError):
            Rect.parse("1,2,3")
        with pytest.raises(ValueError):
            Rect.parse("a,b,c,d")

    def test_validation(self):
        with pytest.raises(ValueError):
            Rect(-1, 0, 3, 3)
        with pytest.raises(ValueError):
            Rect(0, 0, 0, 3)

    def test_geometry(self):
        r = Rect(2, 3, 4, 5)
        assert r.area == 20
        assert r.slices() == (slice(3, 8), slice(2, 6))
        assert r.within(6, 8)
        assert not r.within(5, 8)

    def test_overlaps(self):
        assert Rect(0, 0, 3, 3).overlaps(Rect(2, 2, 3, 3))
        assert not Rect(0, 0, 3, 3).overlaps(Rect(3, 0, 3, 3))


class TestFrameStream:
    def test_from_array(self):
        stack = np.arange(24.0).reshape(2, 3, 4)
        stream = FrameStream.from_array(stack, frame_rate=100.0)
        assert stream.header.frame_count == 2
        assert stream.header.width == 4
        frames = list(stream)
        assert [f.index for f in frames] == [0, 1]
        assert np.array_equal(frames[1].pixels, stack[1])

    def test_reiterable(self):
        stack = np.ones((3, 2, 2))
        stream = FrameStream.from_array(stack, frame_rate=10.0)
        assert len(list(stream)) == 3
        assert len(list(stream)) == 3

    def test_from_frames_rejects_bad_indices(self):
        frames = [Frame(index=1, pixels=np.zeros((2, 2)))]
        with pytest.raises(ValueError):
            FrameStream.from_frames(frames, frame_rate=10.0)

    def test_from_frames_rejects_empty(self):
        with pytest.raises(ValueError):
            FrameStream.from_frames([], frame_rate=10.0)
