"""Streaming per-pixel quadrature lock-in demodulation.

Each incoming frame is multiplied by the in-phase and quadrature references
at the demodulation frequency and added into two per-pixel running sums; no
frame stack is ever stored. The cosine and sine of the reference phase are
evaluated once per frame (they are constant across pixels), so the per-pixel
work is exactly one multiply-accumulate per quadrature.

Accumulation is deterministic: each pixel's sums are updated sequentially in
frame order, so repeated runs over the same stream are bitwise identical.
Sums are kept in float64 regardless of the input bit depth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    AmplitudeImage,
    DemodConfig,
    Frame,
    FrameStream,
    Normalization,
    Rect,
    sample_phase,
)


class FrameOrderError(ValueError):
    """Raised when a frame arrives out of order (or one was skipped)."""

    def __init__(self, expected: int, received: int):
        super().__init__(f"expected frame ordinal {expected}, received {received}")
        self.expected = expected
        self.received = received


class PhasorAccumulator:
    """Per-pixel running in-phase/quadrature sums for one demodulation config.

    Push frames in order with :meth:`push`; call :meth:`finalize` at any
    point to materialize the amplitude/phase images accumulated so far
    (finalize never disturbs the running state).
    """

    def __init__(self, width: int, height: int, config: DemodConfig):
        if width < 1 or height < 1:
            raise ValueError(f"dimensions must be positive, got {width}x{height}")
        self.config = config
        self.x_sum = np.zeros((height, width))
        self.y_sum = np.zeros((height, width))
        self.frames_seen = 0
        self._scratch = np.empty((height, width))

    @property
    def width(self) -> int:
        return self.x_sum.shape[1]

    @property
    def height(self) -> int:
        return self.x_sum.shape[0]

    def push(self, frame: Frame) -> "PhasorAccumulator":
        """Accumulate one frame: x += I*cos(phi_n), y += I*sin(phi_n)."""
        if frame.pixels.shape != self.x_sum.shape:
            raise ValueError(
                f"frame {frame.index} is {frame.width}x{frame.height} but the "
                f"accumulator is {self.width}x{self.height}"
            )
        if frame.index != self.frames_seen:
            raise FrameOrderError(expected=self.frames_seen, received=frame.index)
        phi = sample_phase(self.config, frame.index)
        c = math.cos(phi)
        s = math.sin(phi)
        np.multiply(frame.pixels, c, out=self._scratch)
        np.add(self.x_sum, self._scratch, out=self.x_sum)
        np.multiply(frame.pixels, s, out=self._scratch)
        np.add(self.y_sum, self._scratch, out=self.y_sum)
        self.frames_seen += 1
        return self

    def finalize(self) -> AmplitudeImage:
        """Convert the current sums into an amplitude/phase image.

        Amplitude is k*sqrt(x^2 + y^2) with k = 1 for RAW_SUMS and
        k = 2/frames_seen for TWO_OVER_N; an accumulator that has seen no
        frames finalizes to all-zero amplitude. Phase is atan2(y, x), which
        is 0 wherever both sums are 0.
        """
        amplitude = np.hypot(self.x_sum, self.y_sum)
        if self.config.normalization is Normalization.TWO_OVER_N:
            k = 2.0 / self.frames_seen if self.frames_seen > 0 else 0.0
            amplitude *= k
        phase = np.arctan2(self.y_sum, self.x_sum)
        phase[amplitude == 0.0] = 0.0
        return AmplitudeImage(
            amplitude=amplitude,
            phase=phase,
            frames_used=self.frames_seen,
            config=self.config,
        )


@dataclass(frozen=True)
class SnapshotSeries:
    """Amplitude images captured every `cadence` frames during one pass.

    `entries` is a list of (frames_used, AmplitudeImage), strictly increasing
    in frames_used. `truncated` is set when the final entry does not close a
    full cadence interval (in particular when the cadence exceeds the stream
    length, which yields a single end-of-stream entry).
    """

    cadence: int
    entries: tuple[tuple[int, AmplitudeImage], ...]
    truncated: bool = False


@dataclass(frozen=True)
class ScanResult:
    """Mean in-region amplitude response across a frequency grid."""

    frequencies: np.ndarray
    response: np.ndarray


def _check_stream_configs(stream: FrameStream, configs: list[DemodConfig]) -> None:
    if not configs:
        raise ValueError("at least one demodulation config is required")
    for config in configs:
        if config.frame_rate != stream.header.frame_rate:
            raise ValueError(
                f"config frame_rate {config.frame_rate} fps does not match "
                f"stream frame_rate {stream.header.frame_rate} fps"
            )


def demodulate_stream(stream: FrameStream, configs: list[DemodConfig]) -> list[AmplitudeImage]:
    """Demodulate a stream at several frequencies in a single pass.

    Equivalent to running one PhasorAccumulator per config over the same
    frame sequence; the frames are read exactly once.
    """
    _check_stream_configs(stream, configs)
    header = stream.header
    accs = [PhasorAccumulator(header.width, header.height, c) for c in configs]
    seen = 0
    for frame in stream:
        for acc in accs:
            acc.push(frame)
        seen += 1
    if seen == 0:
        raise ValueError("cannot demodulate an empty stream")
    return [acc.finalize() for acc in accs]


def snapshots(stream: FrameStream, config: DemodConfig, cadence: int | None = None) -> SnapshotSeries:
    """Demodulate a stream, materializing an amplitude image every `cadence` frames.

    One shared accumulator makes a single pass; each entry is the finalize of
    its state after k*cadence frames. The default cadence is one modulation
    cycle, round(frame_rate/frequency). A trailing partial interval (or a
    cadence longer than the whole stream) produces a final end-of-stream
    entry and sets `truncated`.
    """
    _check_stream_configs(stream, [config])
    if cadence is None:
        cadence = config.frames_per_cycle
    if cadence < 1:
        raise ValueError(f"cadence must be >= 1, got {cadence}")
    header = stream.header
    acc = PhasorAccumulator(header.width, header.height, config)
    entries: list[tuple[int, AmplitudeImage]] = []
    for frame in stream:
        acc.push(frame)
        if acc.frames_seen % cadence == 0:
            entries.append((acc.frames_seen, acc.finalize()))
    if acc.frames_seen == 0:
        raise ValueError("cannot demodulate an empty stream")
    truncated = False
    if not entries or entries[-1][0] != acc.frames_seen:
        entries.append((acc.frames_seen, acc.finalize()))
        truncated = True
    return SnapshotSeries(cadence=cadence, entries=tuple(entries), truncated=truncated)


def _region_mask(region, width: int, height: int) -> np.ndarray:
    """Accept a Rect or a boolean mask; return a validated boolean mask."""
    if isinstance(region, Rect):
        if not region.within(width, height):
            raise ValueError(f"region {region} exceeds image bounds {width}x{height}")
        mask = np.zeros((height, width), dtype=bool)
        mask[region.slices()] = True
        return mask
    mask = np.asarray(region)
    if mask.dtype != bool or mask.shape != (height, width):
        raise ValueError(
            f"region must be a Rect or a boolean mask of shape {(height, width)}, "
            f"got dtype {mask.dtype} shape {mask.shape}"
        )
    return mask


def frequency_scan(
    stream: FrameStream,
    region,
    f_min: float,
    f_max: float,
    step: float,
) -> ScanResult:
    """Sweep a demodulation-frequency grid and report the in-region response.

    For each grid frequency the response is the mean TWO_OVER_N amplitude
    over the region pixels (`region` is a Rect or a boolean mask). All grid
    points are demodulated in a single pass, one accumulator per point.
    Intended for locating a modulated source of unknown frequency.
    """
    header = stream.header
    nyquist = header.frame_rate / 2.0
    if not (0 < f_min < f_max < nyquist):
        raise ValueError(
            f"need 0 < f_min < f_max < {nyquist} Hz (Nyquist), got [{f_min}, {f_max}]"
        )
    if not (step > 0):
        raise ValueError(f"step must be > 0, got {step}")
    mask = _region_mask(region, header.width, header.height)
    if not mask.any():
        raise ValueError("region selects no pixels")

    count = int(math.floor((f_max - f_min) / step + 1e-9)) + 1
    frequencies = f_min + step * np.arange(count)
    configs = [
        DemodConfig(frequency=float(f), frame_rate=header.frame_rate,
                    normalization=Normalization.TWO_OVER_N)
        for f in frequencies
    ]
    images = demodulate_stream(stream, configs)
    response = np.array([float(img.amplitude[mask].mean()) for img in images])
    return ScanResult(frequencies=frequencies, response=response)
