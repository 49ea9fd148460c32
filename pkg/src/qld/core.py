"""Core types and conventions for quadrature lock-in demodulation of image streams.

Sample-time convention: frame n is taken at t_n = n / frame_rate, so the
reference phase at frame n is 2*pi*frequency*n/frame_rate + phase_origin.
Because quadrature detection makes the recovered amplitude independent of
any fixed phase offset, this choice only shifts the reported phase map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Iterator

import numpy as np

TAU = math.tau


class Normalization(Enum):
    """Scaling applied when converting quadrature sums to an amplitude image.

    RAW_SUMS leaves the accumulated sums untouched (display parity with
    unnormalized processing); TWO_OVER_N multiplies by 2/frames_seen so that
    an integer-cycle sinusoid of amplitude A is recovered as exactly A.
    """

    RAW_SUMS = "raw"
    TWO_OVER_N = "two-over-n"


def wrap_phase(phi: float) -> float:
    """Reduce an angle in radians to the interval (-pi, pi]."""
    phi = math.fmod(phi, TAU)
    if phi > math.pi:
        phi -= TAU
    elif phi <= -math.pi:
        phi += TAU
    return phi


def phase_at(frequency: float, frame_rate: float, n: int, phase_origin: float = 0.0) -> float:
    """Reference phase at frame ordinal n for a tone of `frequency` Hz.

    The product frequency*n is reduced modulo frame_rate before the 2*pi
    multiply, which keeps the result accurate for large n.
    """
    if n < 0:
        raise ValueError(f"frame ordinal must be >= 0, got {n}")
    turns = math.fmod(frequency * n, frame_rate) / frame_rate
    return wrap_phase(TAU * turns + phase_origin)


@dataclass(frozen=True)
class Frame:
    """One 2-D intensity sample of a scene at a known frame ordinal.

    `pixels` is a (height, width) array of non-negative intensities,
    row-major. Values are integer-valued when the frame came out of a
    container with a declared bit depth; synthetic frames may carry floats.
    """

    index: int
    pixels: np.ndarray

    def __post_init__(self) -> None:
        pixels = np.asarray(self.pixels)
        if pixels.ndim != 2 or pixels.size == 0:
            raise ValueError(f"pixels must be a non-empty 2-D array, got shape {pixels.shape}")
        if self.index < 0:
            raise ValueError(f"frame index must be >= 0, got {self.index}")
        if pixels.dtype.kind != "u" and float(pixels.min()) < 0:
            raise ValueError(f"frame {self.index} has negative pixel values")
        object.__setattr__(self, "pixels", pixels)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class StreamHeader:
    """Metadata describing a frame sequence: geometry, rate, sample depth.

    `exposure_time` is carried for provenance only; nothing computes with it.
    """

    width: int
    height: int
    frame_count: int
    frame_rate: float
    bit_depth: int = 16
    exposure_time: float | None = None

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"dimensions must be positive, got {self.width}x{self.height}")
        if self.frame_count < 1:
            raise ValueError(f"frame_count must be >= 1, got {self.frame_count}")
        if not (self.frame_rate > 0):
            raise ValueError(f"frame_rate must be > 0, got {self.frame_rate}")
        if self.bit_depth not in (8, 16):
            raise ValueError(f"bit_depth must be 8 or 16, got {self.bit_depth}")


@dataclass(frozen=True)
class DemodConfig:
    """Demodulation frequency plus the sampling and normalization conventions.

    The frequency must sit strictly below the Nyquist limit frame_rate/2;
    `phase_origin` rotates the reference oscillator (radians) and affects
    only the recovered phase map, never the amplitude.
    """

    frequency: float
    frame_rate: float
    normalization: Normalization = Normalization.TWO_OVER_N
    phase_origin: float = 0.0

    def __post_init__(self) -> None:
        if not (self.frame_rate > 0):
            raise ValueError(f"frame_rate must be > 0, got {self.frame_rate}")
        if not (self.frequency > 0):
            raise ValueError(f"frequency must be > 0, got {self.frequency}")
        nyquist = self.frame_rate / 2.0
        if not (self.frequency < nyquist):
            raise ValueError(
                f"frequency {self.frequency} Hz violates the Nyquist bound "
                f"{nyquist} Hz (frame_rate/2 at {self.frame_rate} fps)"
            )

    @property
    def frames_per_cycle(self) -> int:
        """Nominal frames per modulation cycle, rounded to the nearest frame."""
        return max(1, round(self.frame_rate / self.frequency))


def sample_phase(config: DemodConfig, n: int) -> float:
    """Reference phase for frame ordinal n under `config`, in (-pi, pi]."""
    return phase_at(config.frequency, config.frame_rate, n, config.phase_origin)


@dataclass(frozen=True)
class AmplitudeImage:
    """Per-pixel modulation amplitude and phase recovered by demodulation.

    `amplitude` is non-negative everywhere. `phase` lies in (-pi, pi] and is
    0 by convention wherever the amplitude is exactly 0.
    """

    amplitude: np.ndarray
    phase: np.ndarray
    frames_used: int
    config: DemodConfig

    @property
    def width(self) -> int:
        return self.amplitude.shape[1]

    @property
    def height(self) -> int:
        return self.amplitude.shape[0]


@dataclass(frozen=True)
class Rect:
    """Axis-aligned pixel rectangle: origin (x, y), size w x h, end-exclusive."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self) -> None:
        if self.x < 0 or self.y < 0:
            raise ValueError(f"rect origin must be non-negative, got ({self.x}, {self.y})")
        if self.w < 1 or self.h < 1:
            raise ValueError(f"rect size must be positive, got {self.w}x{self.h}")

    @classmethod
    def parse(cls, text: str) -> "Rect":
        """Parse 'x,y,w,h' (as used on command lines and in config files)."""
        parts = text.split(",")
        if len(parts) != 4:
            raise ValueError(f"expected 'x,y,w,h', got {text!r}")
        try:
            x, y, w, h = (int(p.strip()) for p in parts)
        except ValueError:
            raise ValueError(f"rect components must be integers, got {text!r}") from None
        return cls(x, y, w, h)

    @property
    def area(self) -> int:
        return self.w * self.h

    def slices(self) -> tuple[slice, slice]:
        """(row, column) slices for indexing a (height, width) array."""
        return slice(self.y, self.y + self.h), slice(self.x, self.x + self.w)

    def within(self, width: int, height: int) -> bool:
        return self.x + self.w <= width and self.y + self.h <= height

    def overlaps(self, other: "Rect") -> bool:
        return not (
            self.x + self.w <= other.x
            or other.x + other.w <= self.x
            or self.y + self.h <= other.y
            or other.y + other.h <= self.y
        )


class FrameStream:
    """An ordered frame sequence plus its header metadata.

    Iteration starts a fresh pass over the frames; sources backed by a file
    or a scene re-read or re-render on every pass, so a stream can be
    consumed more than once without buffering it in memory.
    """

    def __init__(self, header: StreamHeader, source: Callable[[], Iterator[Frame]]):
        self.header = header
        self._source = source

    def __iter__(self) -> Iterator[Frame]:
        return self._source()

    def __len__(self) -> int:
        return self.header.frame_count

    @classmethod
    def from_frames(
        cls, frames: Iterable[Frame], frame_rate: float, bit_depth: int = 16
    ) -> "FrameStream":
        """Wrap an in-memory list of frames (indices must run 0..n-1)."""
        frames = list(frames)
        if not frames:
            raise ValueError("cannot build a stream from zero frames")
        first = frames[0]
        for i, frame in enumerate(frames):
            if frame.index != i:
                raise ValueError(f"expected frame index {i}, got {frame.index}")
            if frame.pixels.shape != first.pixels.shape:
                raise ValueError(
                    f"frame {i} shape {frame.pixels.shape} != frame 0 shape {first.pixels.shape}"
                )
        header = StreamHeader(
            width=first.width,
            height=first.height,
            frame_count=len(frames),
            frame_rate=frame_rate,
            bit_depth=bit_depth,
        )
        return cls(header, lambda: iter(frames))

    @classmethod
    def from_array(cls, stack: np.ndarray, frame_rate: float, bit_depth: int = 16) -> "FrameStream":
        """Wrap a (frames, height, width) array as a stream."""
        stack = np.asarray(stack)
        if stack.ndim != 3:
            raise ValueError(f"expected a (frames, height, width) array, got shape {stack.shape}")
        frames = [Frame(index=n, pixels=stack[n]) for n in range(stack.shape[0])]
        return cls.from_frames(frames, frame_rate, bit_depth)
