"""Throughput measurement for the streaming demodulation engine.

Frames are synthesized in memory before the clock starts; the timed section
contains only push_frame work plus a finalize once per modulation cycle
(the cadence a live display would use). No I/O happens inside the timed
loop, so the result is the sustained pixel-pipeline rate.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .core import DemodConfig, Frame
from .demod import PhasorAccumulator

_POOL_FRAMES = 32  # distinct pre-rendered frames, cycled during the run


@dataclass(frozen=True)
class BenchResult:
    """Measured engine throughput for one benchmark configuration."""

    width: int
    height: int
    n_frequencies: int
    frames: int
    elapsed_s: float
    frames_per_s: float  # stream frames consumed per second
    pushes_per_s: float  # accumulator pushes per second (frames * frequencies)
    finalizes: int
    target_fps: float
    passed: bool


def run_benchmark(
    width: int,
    height: int,
    target_fps: float,
    seconds: float,
    n_frequencies: int = 1,
    seed: int = 0,
) -> BenchResult:
    """Measure sustained frames/second of push+periodic-finalize.

    `target_fps` is the acquisition rate the engine must keep up with; the
    benchmark replays seconds*target_fps synthetic frames as fast as it can.
    `passed` compares the measured rate against the target (meaningful for a
    single frequency; with several, the per-frequency and aggregate rates
    are what matter).
    """
    if n_frequencies < 1:
        raise ValueError(f"n_frequencies must be >= 1, got {n_frequencies}")
    if not (target_fps > 0) or not (seconds > 0):
        raise ValueError("target_fps and seconds must be positive")
    total_frames = max(1, round(target_fps * seconds))

    rng = np.random.default_rng(seed)
    pool = [
        rng.integers(0, 4096, size=(height, width), dtype=np.uint16)
        for _ in range(min(_POOL_FRAMES, total_frames))
    ]

    # 13 Hz and neighbours, kept under Nyquist for small target rates
    base = min(13.0, target_fps / 4.0)
    configs = [
        DemodConfig(frequency=base + i * base / 8.0, frame_rate=target_fps)
        for i in range(n_frequencies)
    ]
    accs = [PhasorAccumulator(width, height, c) for c in configs]
    finalize_every = configs[0].frames_per_cycle
    finalizes = 0

    start = time.perf_counter()
    for n in range(total_frames):
        frame = Frame(index=n, pixels=pool[n % len(pool)])
        for acc in accs:
            acc.push(frame)
        if (n + 1) % finalize_every == 0:
            accs[0].finalize()
            finalizes += 1
    elapsed = time.perf_counter() - start

    fps = total_frames / elapsed
    return BenchResult(
        width=width,
        height=height,
        n_frequencies=n_frequencies,
        frames=total_frames,
        elapsed_s=elapsed,
        frames_per_s=fps,
        pushes_per_s=fps * n_frequencies,
        finalizes=finalizes,
        target_fps=target_fps,
        passed=fps >= target_fps,
    )
