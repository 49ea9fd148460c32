"""Independent oracles shared by the test modules.

The value-level oracle (`oracle_amplitude`) recomputes quadrature sums over
a stored frame stack with einsum and unreduced phases, deliberately avoiding
the library's accumulation path and argument-reduction convention. The
frame-order oracle (`batch_sums_frame_order`) reproduces the library's
summation order over a stored stack, which is what makes bitwise
streaming-equals-batch comparisons meaningful.
"""

from __future__ import annotations

import math

import numpy as np

from qld import DemodConfig, FrameStream, sample_phase


def stack_from_stream(stream: FrameStream) -> np.ndarray:
    """Materialize a stream as a (frames, height, width) float64 stack."""
    return np.stack([np.asarray(f.pixels, dtype=np.float64) for f in stream])


def oracle_sums(
    stack: np.ndarray, frequency: float, frame_rate: float, phase_origin: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form quadrature sums over a stored stack (independent path)."""
    n = np.arange(stack.shape[0], dtype=np.float64)
    phi = 2.0 * np.pi * frequency * n / frame_rate + phase_origin
    x = np.einsum("nhw,n->hw", stack, np.cos(phi))
    y = np.einsum("nhw,n->hw", stack, np.sin(phi))
    return x, y


def oracle_amplitude(
    stack: np.ndarray,
    frequency: float,
    frame_rate: float,
    two_over_n: bool = True,
    phase_origin: float = 0.0,
) -> np.ndarray:
    x, y = oracle_sums(stack, frequency, frame_rate, phase_origin)
    amplitude = np.hypot(x, y)
    if two_over_n and stack.shape[0] > 0:
        amplitude *= 2.0 / stack.shape[0]
    return amplitude


def batch_sums_frame_order(
    stack: np.ndarray, config: DemodConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Stored-stack sums accumulated pixelwise in frame order.

    Uses the library's phase convention but its own storage and loop, so a
    bitwise match against the streaming accumulator checks that streaming
    accumulation equals the closed-form sums over a stack.
    """
    x = np.zeros(stack.shape[1:])
    y = np.zeros(stack.shape[1:])
    for n in range(stack.shape[0]):
        phi = sample_phase(config, n)
        x += stack[n] * math.cos(phi)
        y += stack[n] * math.sin(phi)
    return x, y


def pearson(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.corrcoef(np.ravel(a), np.ravel(b))[0, 1])
