"""Contrast-to-noise ratio over explicit object/background pixel regions.

CNR = (<I_obj> - <I_back>) / sqrt(<(I - <I_back>)^2>_back)

where the denominator is the population standard deviation of the background
pixels (divide by the pixel count, not count-1). The default background
geometry places eight blocks, each the size of the object rectangle, on the
surrounding cells of a 3x3 grid centered on the object.

CNR is invariant under any affine rescaling a*I + b (a > 0) of the image and
changes sign when the object is darker than the background.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO

import numpy as np

from .core import AmplitudeImage, DemodConfig, FrameStream, Rect
from .demod import snapshots


class DegenerateBackgroundError(ValueError):
    """Background variance is zero, so CNR is undefined (not infinite)."""


@dataclass(frozen=True)
class RegionSpec:
    """Object rectangle plus disjoint background blocks for CNR evaluation."""

    object_rect: Rect
    background_blocks: tuple[Rect, ...]

    def __post_init__(self) -> None:
        blocks = tuple(self.background_blocks)
        if not blocks:
            raise ValueError("at least one background block is required")
        if sum(b.area for b in blocks) < 2:
            raise ValueError("background needs at least 2 pixels")
        for i, block in enumerate(blocks):
            if block.overlaps(self.object_rect):
                raise ValueError(f"background block {i} {block} overlaps the object rect")
            for other in blocks[:i]:
                if block.overlaps(other):
                    raise ValueError(f"background blocks {other} and {block} overlap")
        object.__setattr__(self, "background_blocks", blocks)

    def require_within(self, width: int, height: int) -> None:
        for rect in (self.object_rect, *self.background_blocks):
            if not rect.within(width, height):
                raise ValueError(f"region rect {rect} exceeds image bounds {width}x{height}")


def auto_background(object_rect: Rect) -> RegionSpec:
    """Default geometry: 8 object-sized blocks on the cells surrounding the object."""
    x, y, w, h = object_rect.x, object_rect.y, object_rect.w, object_rect.h
    blocks = []
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dx == 0 and dy == 0:
                continue
            bx, by = x + dx * w, y + dy * h
            if bx < 0 or by < 0:
                raise ValueError(
                    f"object rect {object_rect} too close to the image origin for "
                    "the default 8-block background layout"
                )
            blocks.append(Rect(bx, by, w, h))
    return RegionSpec(object_rect=object_rect, background_blocks=tuple(blocks))


@dataclass(frozen=True)
class CnrReport:
    """One CNR evaluation with its constituent statistics and pixel counts."""

    cnr: float
    object_mean: float
    background_mean: float
    background_std: float
    object_pixels: int
    background_pixels: int

    def as_dict(self) -> dict:
        return {
            "cnr": self.cnr,
            "object_mean": self.object_mean,
            "background_mean": self.background_mean,
            "background_std": self.background_std,
            "object_pixels": self.object_pixels,
            "background_pixels": self.background_pixels,
        }


def _as_image(image) -> np.ndarray:
    if isinstance(image, AmplitudeImage):
        return image.amplitude
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {image.shape}")
    return image


def _region_stats(image: np.ndarray, regions: RegionSpec):
    obj = image[regions.object_rect.slices()]
    back = np.concatenate([image[b.slices()].ravel() for b in regions.background_blocks])
    object_mean = float(obj.mean())
    background_mean = float(back.mean())
    variance = float(np.mean((back - background_mean) ** 2))
    return object_mean, background_mean, variance, obj.size, back.size


def cnr(image, regions: RegionSpec) -> CnrReport:
    """Contrast-to-noise ratio of `image` (2-D array or AmplitudeImage).

    Raises DegenerateBackgroundError when the background variance is exactly
    zero (a noiseless synthetic image, typically).
    """
    image = _as_image(image)
    regions.require_within(image.shape[1], image.shape[0])
    object_mean, background_mean, variance, n_obj, n_back = _region_stats(image, regions)
    if variance == 0.0:
        raise DegenerateBackgroundError(
            "degenerate background: zero variance over the background blocks"
        )
    background_std = math.sqrt(variance)
    return CnrReport(
        cnr=(object_mean - background_mean) / background_std,
        object_mean=object_mean,
        background_mean=background_mean,
        background_std=background_std,
        object_pixels=n_obj,
        background_pixels=n_back,
    )


@dataclass(frozen=True)
class CnrCurvePoint:
    """CNR of one demodulation snapshot; `degenerate` marks zero background variance."""

    cycles: float
    frames: int
    cnr: float  # nan when degenerate
    object_mean: float
    background_mean: float
    background_std: float
    degenerate: bool


def cnr_curve(
    stream: FrameStream,
    config: DemodConfig,
    regions: RegionSpec,
    cadence: int | None = None,
) -> list[CnrCurvePoint]:
    """CNR of each demodulation snapshot, against processed modulation cycles.

    One streaming pass (shared accumulator); cycles = frames * frequency /
    frame_rate. Degenerate snapshots are reported per entry, not raised.
    """
    regions.require_within(stream.header.width, stream.header.height)
    series = snapshots(stream, config, cadence)
    points = []
    for frames_used, image in series.entries:
        object_mean, background_mean, variance, _, _ = _region_stats(image.amplitude, regions)
        degenerate = variance == 0.0
        background_std = math.sqrt(variance)
        value = math.nan if degenerate else (object_mean - background_mean) / background_std
        points.append(
            CnrCurvePoint(
                cycles=frames_used * config.frequency / config.frame_rate,
                frames=frames_used,
                cnr=value,
                object_mean=object_mean,
                background_mean=background_mean,
                background_std=background_std,
                degenerate=degenerate,
            )
        )
    return points


CURVE_CSV_COLUMNS = ("cycles", "frames", "cnr", "object_mean", "background_mean", "background_std")


def curve_to_csv(points: list[CnrCurvePoint], out: IO[str]) -> None:
    """Write a CNR curve as RFC-4180-style CSV with a header row."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CURVE_CSV_COLUMNS)
    for p in points:
        writer.writerow(
            [repr(p.cycles), p.frames, repr(p.cnr), repr(p.object_mean),
             repr(p.background_mean), repr(p.background_std)]
        )
