"""Shared fixtures: a small seeded two-tone scene used across test modules."""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qld import make_two_tone_scene, pattern_rings, pattern_stripes, scene_stream

TWO_TONE_SEED = 7
TWO_TONE_SIZE = 24


@pytest.fixture(scope="session")
def two_tone_small():
    """24x24 two-tone scene, 5 repetitions (1105 frames), fixed seed.

    Returns (spec, stream, pattern_a, pattern_b); pattern_a is modulated at
    13 Hz, pattern_b at 17 Hz.
    """
    a = pattern_rings(TWO_TONE_SIZE, TWO_TONE_SIZE)
    b = pattern_stripes(TWO_TONE_SIZE, TWO_TONE_SIZE)
    spec = make_two_tone_scene(a, b, reps=5, noise_seed=TWO_TONE_SEED)
    return spec, scene_stream(spec), a, b
