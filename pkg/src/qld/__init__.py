"""Quadrature lock-in discrimination (QLD) for image streams.

Streams of camera frames containing an intensity-modulated source are
demodulated pixel by pixel against in-phase and quadrature references,
recovering the modulation amplitude while rejecting any unmodulated
background. Includes deterministic scene synthesis, an exact binary stream
container, contrast-to-noise scoring, and a throughput benchmark.
"""

__version__ = "0.1.0"

from .bench import BenchResult, run_benchmark
from .core import (
    AmplitudeImage,
    DemodConfig,
    Frame,
    FrameStream,
    Normalization,
    Rect,
    StreamHeader,
    phase_at,
    sample_phase,
    wrap_phase,
)
from .demod import (
    FrameOrderError,
    PhasorAccumulator,
    ScanResult,
    SnapshotSeries,
    demodulate_stream,
    frequency_scan,
    snapshots,
)
from .metrics import (
    CnrCurvePoint,
    CnrReport,
    DegenerateBackgroundError,
    RegionSpec,
    auto_background,
    cnr,
    cnr_curve,
    curve_to_csv,
)
from .qlds import (
    ContainerFormatError,
    export_pgm,
    open_stream,
    quantize_frame,
    read_header,
    read_pgm,
    read_stream,
    write_pgm,
    write_stream,
)
from .scene import (
    NoiseKind,
    NoiseSpec,
    SceneSpec,
    SourceLayer,
    make_beacon_scene,
    make_two_tone_scene,
    pattern_rings,
    pattern_stripes,
    render_frame,
    scene_stream,
)
from .sceneconfig import (
    SceneConfigError,
    load_scene_config,
    parse_scene_config,
    save_scene_config,
)

__all__ = [
    "AmplitudeImage",
    "BenchResult",
    "CnrCurvePoint",
    "CnrReport",
    "ContainerFormatError",
    "DegenerateBackgroundError",
    "DemodConfig",
    "Frame",
    "FrameOrderError",
    "FrameStream",
    "NoiseKind",
    "NoiseSpec",
    "Normalization",
    "PhasorAccumulator",
    "Rect",
    "RegionSpec",
    "ScanResult",
    "SceneConfigError",
    "SceneSpec",
    "SnapshotSeries",
    "SourceLayer",
    "StreamHeader",
    "auto_background",
    "cnr",
    "cnr_curve",
    "curve_to_csv",
    "demodulate_stream",
    "export_pgm",
    "frequency_scan",
    "load_scene_config",
    "make_beacon_scene",
    "make_two_tone_scene",
    "open_stream",
    "parse_scene_config",
    "pattern_rings",
    "pattern_stripes",
    "phase_at",
    "quantize_frame",
    "read_header",
    "read_pgm",
    "read_stream",
    "render_frame",
    "run_benchmark",
    "sample_phase",
    "save_scene_config",
    "scene_stream",
    "snapshots",
    "wrap_phase",
    "write_pgm",
    "write_stream",
]
