"""Deterministic, seedable synthesis of modulated frame streams.

A scene is a sum of source layers, each a spatial amplitude pattern
oscillating as offset + base*cos(2*pi*f*t_n + phase), plus an optional
per-pixel noise term. Noise uses a counter-based generator (Philox keyed by
the seed, counter set from the frame ordinal), so every pixel of every frame
is a pure function of (seed, frame, pixel): streams are bitwise reproducible
in any access order, and single frames can be re-rendered in isolation.

render_frame is pure and side-effect-free; frames may be rendered
concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import TAU, Frame, FrameStream, Rect, StreamHeader, phase_at

TWO_TONE_FRAME_RATE = 221.0  # fps: 13 Hz and 17 Hz both complete whole cycles in 221 frames
TWO_TONE_FRAMES_PER_REP = 221
TWO_TONE_FREQ_A = 13.0
TWO_TONE_FREQ_B = 17.0
TWO_TONE_OFFSET = 255.0
TWO_TONE_NOISE_HIGH = 1275.0  # uniform additive noise upper bound, 5 * 255


class NoiseKind(Enum):
    NONE = "none"
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class NoiseSpec:
    """Per-pixel additive noise model with a counter-based RNG seed.

    UNIFORM draws from [low, high); GAUSSIAN from N(mean, sigma). Draws are
    independent per pixel per frame.
    """

    kind: NoiseKind = NoiseKind.NONE
    low: float = 0.0
    high: float = 0.0
    mean: float = 0.0
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind is NoiseKind.UNIFORM and not (self.low <= self.high):
            raise ValueError(f"uniform noise needs low <= high, got [{self.low}, {self.high}]")
        if self.kind is NoiseKind.GAUSSIAN and self.sigma < 0:
            raise ValueError(f"gaussian noise needs sigma >= 0, got {self.sigma}")

    @classmethod
    def none(cls) -> "NoiseSpec":
        return cls()

    @classmethod
    def uniform(cls, low: float, high: float, seed: int = 0) -> "NoiseSpec":
        return cls(kind=NoiseKind.UNIFORM, low=low, high=high, seed=seed)

    @classmethod
    def gaussian(cls, mean: float, sigma: float, seed: int = 0) -> "NoiseSpec":
        return cls(kind=NoiseKind.GAUSSIAN, mean=mean, sigma=sigma, seed=seed)

    @property
    def active(self) -> bool:
        if self.kind is NoiseKind.NONE:
            return False
        if self.kind is NoiseKind.UNIFORM:
            return self.high > self.low
        return self.sigma > 0 or self.mean != 0

    def draw(self, n: int, shape: tuple[int, int]) -> np.ndarray | None:
        """Noise field for frame n; pure function of (seed, n) and the shape."""
        if self.kind is NoiseKind.NONE:
            return None
        # Counter stride of 2**128 blocks per frame: no overlap between frames.
        rng = np.random.Generator(np.random.Philox(key=self.seed, counter=n << 128))
        if self.kind is NoiseKind.UNIFORM:
            return rng.uniform(self.low, self.high, shape)
        return rng.normal(self.mean, self.sigma, shape)


@dataclass(frozen=True)
class SourceLayer:
    """One modulated source: pixel contribution offset + base*cos(2*pi*f*t + phase).

    A layer with frequency 0 is a purely DC structure (ambient light, glare);
    base_image must be non-negative everywhere.
    """

    base_image: np.ndarray
    frequency: float
    phase: float = 0.0
    offset: float = 0.0

    def __post_init__(self) -> None:
        base = np.asarray(self.base_image, dtype=np.float64)
        if base.ndim != 2 or base.size == 0:
            raise ValueError(f"base_image must be a non-empty 2-D array, got shape {base.shape}")
        if float(base.min()) < 0:
            raise ValueError("base_image must be non-negative")
        if self.frequency < 0:
            raise ValueError(f"layer frequency must be >= 0, got {self.frequency}")
        object.__setattr__(self, "base_image", base)


@dataclass(frozen=True)
class SceneSpec:
    """Full recipe for a synthetic stream: geometry, layers, noise, clamp.

    The clamp, when set, is applied after layer summation and noise. A spec
    must carry at least one layer or active noise.
    """

    width: int
    height: int
    frame_rate: float
    frame_count: int
    layers: tuple[SourceLayer, ...] = ()
    noise: NoiseSpec = field(default_factory=NoiseSpec.none)
    clamp: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"dimensions must be positive, got {self.width}x{self.height}")
        if not (self.frame_rate > 0):
            raise ValueError(f"frame_rate must be > 0, got {self.frame_rate}")
        if self.frame_count < 1:
            raise ValueError(f"frame_count must be >= 1, got {self.frame_count}")
        if not self.layers and not self.noise.active:
            raise ValueError("scene needs at least one layer or active noise")
        for i, layer in enumerate(self.layers):
            if layer.base_image.shape != (self.height, self.width):
                raise ValueError(
                    f"layer {i} base_image shape {layer.base_image.shape} does not "
                    f"match scene {self.width}x{self.height}"
                )
            if layer.frequency >= self.frame_rate / 2.0:
                raise ValueError(
                    f"layer {i} frequency {layer.frequency} Hz is not below the "
                    f"Nyquist limit {self.frame_rate / 2.0} Hz"
                )
        if self.clamp is not None:
            lo, hi = self.clamp
            if not (lo < hi):
                raise ValueError(f"clamp needs min < max, got ({lo}, {hi})")


def render_frame(spec: SceneSpec, n: int) -> Frame:
    """Render frame n of a scene. Pure: depends only on (spec, n)."""
    if not (0 <= n < spec.frame_count):
        raise ValueError(f"frame ordinal {n} outside [0, {spec.frame_count})")
    shape = (spec.height, spec.width)
    acc = np.zeros(shape)
    for layer in spec.layers:
        phi = phase_at(layer.frequency, spec.frame_rate, n, layer.phase)
        acc += layer.offset + layer.base_image * math.cos(phi)
    noise = spec.noise.draw(n, shape)
    if noise is not None:
        acc += noise
    if spec.clamp is not None:
        np.clip(acc, spec.clamp[0], spec.clamp[1], out=acc)
    return Frame(index=n, pixels=acc)


def scene_stream(spec: SceneSpec, bit_depth: int = 16) -> FrameStream:
    """Lazily rendered FrameStream over a scene (re-renders on every pass)."""
    header = StreamHeader(
        width=spec.width,
        height=spec.height,
        frame_count=spec.frame_count,
        frame_rate=spec.frame_rate,
        bit_depth=bit_depth,
    )

    def frames():
        for n in range(spec.frame_count):
            yield render_frame(spec, n)

    return FrameStream(header, frames)


def _check_8bit_pattern(name: str, image: np.ndarray) -> np.ndarray:
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2 or image.size == 0:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {image.shape}")
    if float(image.min()) < 0 or float(image.max()) > 255:
        raise ValueError(f"{name} values must lie in the 8-bit range [0, 255]")
    return image


def make_two_tone_scene(image_a, image_b, reps: int = 5, noise_seed: int = 0) -> SceneSpec:
    """Two 8-bit patterns modulated at 13 Hz and 17 Hz, mixed and buried in noise.

    Both tones complete whole numbers of cycles every 221 frames at 221 fps
    (13 and 17 cycles respectively), so `reps` repetitions give reps*221
    frames. Each layer carries a +255 offset, and every pixel of every frame
    gets uniform additive noise in [0, 1275). Demodulating at 13 or 17 Hz
    recovers the matching pattern; any other frequency recovers neither.
    """
    image_a = _check_8bit_pattern("image_a", image_a)
    image_b = _check_8bit_pattern("image_b", image_b)
    if image_a.shape != image_b.shape:
        raise ValueError(
            f"pattern dimensions differ: {image_a.shape} vs {image_b.shape}"
        )
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    height, width = image_a.shape
    return SceneSpec(
        width=width,
        height=height,
        frame_rate=TWO_TONE_FRAME_RATE,
        frame_count=reps * TWO_TONE_FRAMES_PER_REP,
        layers=(
            SourceLayer(base_image=image_a, frequency=TWO_TONE_FREQ_A, offset=TWO_TONE_OFFSET),
            SourceLayer(base_image=image_b, frequency=TWO_TONE_FREQ_B, offset=TWO_TONE_OFFSET),
        ),
        noise=NoiseSpec.uniform(0.0, TWO_TONE_NOISE_HIGH, seed=noise_seed),
    )


def pattern_rings(width: int, height: int) -> np.ndarray:
    """Built-in 8-bit test pattern: a radial intensity cone (graded disk)."""
    y, x = np.mgrid[0:height, 0:width]
    cx, cy = 0.38 * width, 0.42 * height
    radius = 0.30 * min(width, height)
    d = np.hypot(x - cx, y - cy)
    return np.rint(255.0 * np.clip(1.0 - d / radius, 0.0, 1.0))


def pattern_stripes(width: int, height: int) -> np.ndarray:
    """Built-in 8-bit test pattern: diagonal sinusoidal stripes in a disk."""
    y, x = np.mgrid[0:height, 0:width]
    cx, cy = 0.64 * width, 0.58 * height
    radius = 0.30 * min(width, height)
    d = np.hypot(x - cx, y - cy)
    stripes = 0.5 + 0.5 * np.sin(TAU * (x + y) / 7.0)  # ~7 px stripe period
    return np.rint(255.0 * stripes * (d <= radius))


def make_beacon_scene(
    width: int,
    height: int,
    frame_rate: float,
    frame_count: int,
    frequency: float,
    beacon_rect: Rect,
    beacon_amplitude: float,
    beacon_dc: float | None = None,
    ambient: float = 0.0,
    glare_rect: Rect | None = None,
    glare_level: float = 0.0,
    noise: NoiseSpec | None = None,
    phase: float = 0.0,
) -> SceneSpec:
    """A modulated beacon in a DC background, optionally with a glare blob.

    The beacon rectangle oscillates with the given amplitude around its own
    DC level `beacon_dc` (default: equal to the amplitude, i.e. the intensity
    swings down to zero). Ambient light and the glare blob are strictly
    unmodulated, so lock-in demodulation must reject them entirely.
    """
    if beacon_amplitude < 0:
        raise ValueError(f"beacon_amplitude must be >= 0, got {beacon_amplitude}")
    if not beacon_rect.within(width, height):
        raise ValueError(f"beacon rect {beacon_rect} exceeds scene bounds {width}x{height}")
    if glare_rect is not None and not glare_rect.within(width, height):
        raise ValueError(f"glare rect {glare_rect} exceeds scene bounds {width}x{height}")
    if beacon_dc is None:
        beacon_dc = beacon_amplitude
    if beacon_dc < beacon_amplitude:
        raise ValueError(
            f"beacon_dc {beacon_dc} smaller than amplitude {beacon_amplitude}: "
            "intensity would go negative"
        )

    shape = (height, width)
    modulated = np.zeros(shape)
    modulated[beacon_rect.slices()] = beacon_amplitude
    dc = np.full(shape, float(ambient))
    dc[beacon_rect.slices()] += beacon_dc
    if glare_rect is not None:
        dc[glare_rect.slices()] += glare_level
    return SceneSpec(
        width=width,
        height=height,
        frame_rate=frame_rate,
        frame_count=frame_count,
        layers=(
            SourceLayer(base_image=modulated, frequency=frequency, phase=phase),
            SourceLayer(base_image=dc, frequency=0.0),
        ),
        noise=noise if noise is not None else NoiseSpec.none(),
    )
