"""Command-line surface: synthesize, demodulate, score, scan, benchmark.

Every run prints machine-parseable key=value lines on stdout and emits a
JSON manifest recording the resolved parameter set, the seed, SHA-256 of
the inputs, the output paths, and timing. `qld replay manifest.json` re-runs
the recorded argv and reproduces the output files bitwise.

Exit codes: 0 success, 2 usage errors, 3 data/validation errors, 4 I/O
errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
import time
from pathlib import Path

from . import __version__
from .bench import run_benchmark
from .core import DemodConfig, Normalization, Rect
from .demod import demodulate_stream, snapshots
from .metrics import RegionSpec, auto_background, cnr
from .qlds import export_pgm, open_stream, quantize_frame, read_pgm, write_stream
from .scene import make_two_tone_scene, scene_stream
from .sceneconfig import load_scene_config

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_IO = 4

DEFAULT_SEED = 0


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _emit(pairs: dict) -> None:
    for key, value in pairs.items():
        if isinstance(value, bool):
            value = "true" if value else "false"
        print(f"{key}={value}")


def _write_manifest(
    path: Path,
    subcommand: str,
    argv: list[str],
    parameters: dict,
    seed: int | None,
    inputs: list[Path],
    outputs: list[Path],
    wall_clock_s: float,
    throughput_fps: float | None,
) -> None:
    manifest = {
        "tool": "qld",
        "version": __version__,
        "subcommand": subcommand,
        "argv": argv,
        "parameters": parameters,
        "seed": seed,
        "inputs": {str(p): _sha256(Path(p)) for p in inputs},
        "outputs": [str(p) for p in outputs],
        "wall_clock_s": wall_clock_s,
        "throughput_fps": throughput_fps,
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def _parse_freqs(text: str) -> list[float]:
    try:
        freqs = [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad frequency list {text!r}") from None
    if not freqs:
        raise argparse.ArgumentTypeError("at least one frequency is required")
    return freqs


def _parse_scale(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'min,max', got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers in {text!r}") from None


def _parse_rect_arg(text: str) -> Rect:
    try:
        return Rect.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _freq_label(frequency: float) -> str:
    return f"{frequency:g}Hz"


def cmd_synth(args) -> int:
    start = time.perf_counter()
    out = Path(args.out)
    inputs: list[Path] = []
    if args.fig2 is not None:
        image_a, image_b = (Path(p) for p in args.fig2)
        inputs += [image_a, image_b]
        seed = args.seed if args.seed is not None else DEFAULT_SEED
        spec = make_two_tone_scene(
            read_pgm(image_a), read_pgm(image_b), reps=args.reps, noise_seed=seed
        )
        argv = ["synth", "--fig2", str(image_a), str(image_b), "--reps", str(args.reps)]
    else:
        config_path = Path(args.config)
        inputs.append(config_path)
        spec = load_scene_config(config_path)
        seed = args.seed if args.seed is not None else spec.noise.seed
        if seed != spec.noise.seed:
            spec = dataclasses.replace(spec, noise=dataclasses.replace(spec.noise, seed=seed))
        argv = ["synth", "--config", str(config_path)]
    argv += ["--seed", str(seed), "--bit-depth", str(args.bit_depth), "--out", str(out)]

    stream = scene_stream(spec, bit_depth=args.bit_depth)
    write_stream(
        out, stream.header,
        (quantize_frame(frame, args.bit_depth) for frame in stream),
    )
    wall = time.perf_counter() - start
    throughput = spec.frame_count / wall if wall > 0 else None

    manifest_path = Path(args.manifest) if args.manifest else Path(f"{out}.manifest.json")
    _write_manifest(
        manifest_path, "synth", argv,
        parameters={
            "config": str(args.config) if args.config else None,
            "fig2": [str(p) for p in args.fig2] if args.fig2 else None,
            "reps": args.reps,
            "bit_depth": args.bit_depth,
            "out": str(out),
            "frame_count": spec.frame_count,
            "frame_rate": spec.frame_rate,
            "width": spec.width,
            "height": spec.height,
        },
        seed=seed, inputs=inputs, outputs=[out],
        wall_clock_s=wall, throughput_fps=throughput,
    )
    _emit({
        "subcommand": "synth",
        "seed": seed,
        "frames": spec.frame_count,
        "frame_rate": spec.frame_rate,
        "out": out,
        "manifest": manifest_path,
        "wall_clock_s": f"{wall:.3f}",
    })
    return EXIT_OK


def cmd_demod(args) -> int:
    start = time.perf_counter()
    in_path = Path(args.input)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stream = open_stream(in_path)
    norm = Normalization.RAW_SUMS if args.norm == "raw" else Normalization.TWO_OVER_N
    configs = [
        DemodConfig(frequency=f, frame_rate=stream.header.frame_rate, normalization=norm)
        for f in args.freq
    ]

    outputs: list[Path] = []
    if args.snapshots is not None:
        if not (args.snapshots > 0):
            raise ValueError(f"--snapshots must be > 0 cycles, got {args.snapshots}")
        finals = []
        for config in configs:
            cadence = max(1, round(args.snapshots * config.frame_rate / config.frequency))
            series = snapshots(stream, config, cadence)
            finals.append(series.entries[-1][1])
            csv_path = out_dir / f"snapshots_{_freq_label(config.frequency)}.csv"
            with open(csv_path, "w") as f:
                f.write("frames,cycles,mean_amplitude,rms_amplitude,max_amplitude\n")
                for frames_used, image in series.entries:
                    amp = image.amplitude
                    cycles = frames_used * config.frequency / config.frame_rate
                    f.write(
                        f"{frames_used},{cycles!r},{float(amp.mean())!r},"
                        f"{float((amp ** 2).mean() ** 0.5)!r},{float(amp.max())!r}\n"
                    )
            outputs.append(csv_path)
    else:
        finals = demodulate_stream(stream, configs)

    for config, image in zip(configs, finals):
        pgm_path = out_dir / f"amplitude_{_freq_label(config.frequency)}.pgm"
        export_pgm(image, pgm_path, scale=args.scale)
        outputs.append(pgm_path)

    wall = time.perf_counter() - start
    throughput = stream.header.frame_count / wall if wall > 0 else None
    argv = ["demod", "--in", str(in_path), "--freq", ",".join(repr(f) for f in args.freq),
            "--norm", args.norm]
    if args.snapshots is not None:
        argv += ["--snapshots", repr(args.snapshots)]
    if args.scale is not None:
        argv += ["--scale", f"{args.scale[0]!r},{args.scale[1]!r}"]
    argv += ["--out", str(out_dir)]

    manifest_path = Path(args.manifest) if args.manifest else out_dir / "manifest.json"
    _write_manifest(
        manifest_path, "demod", argv,
        parameters={
            "in": str(in_path),
            "frequencies": args.freq,
            "norm": args.norm,
            "snapshots_cycles": args.snapshots,
            "scale": list(args.scale) if args.scale else None,
            "out": str(out_dir),
            "frame_count": stream.header.frame_count,
            "frame_rate": stream.header.frame_rate,
        },
        seed=None, inputs=[in_path], outputs=outputs,
        wall_clock_s=wall, throughput_fps=throughput,
    )
    _emit({
        "subcommand": "demod",
        "frames": stream.header.frame_count,
        "frequencies": ",".join(f"{f:g}" for f in args.freq),
        "outputs": ";".join(str(p) for p in outputs),
        "manifest": manifest_path,
        "wall_clock_s": f"{wall:.3f}",
        "throughput_fps": f"{throughput:.1f}" if throughput else "",
    })
    return EXIT_OK


def _parse_background(text: str) -> list[Rect]:
    rects = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if chunk:
            rects.append(Rect.parse(chunk))
    if not rects:
        raise ValueError("background rect list is empty")
    return rects


def cmd_cnr(args) -> int:
    start = time.perf_counter()
    in_path = Path(args.input)
    image = read_pgm(in_path).astype(float)
    if args.background == "auto":
        regions = auto_background(args.object)
    else:
        regions = RegionSpec(
            object_rect=args.object,
            background_blocks=tuple(_parse_background(args.background)),
        )
    report = cnr(image, regions)
    wall = time.perf_counter() - start

    if args.manifest:
        argv = ["cnr", "--in", str(in_path),
                "--object", f"{args.object.x},{args.object.y},{args.object.w},{args.object.h}",
                "--background", args.background, "--manifest", str(args.manifest)]
        _write_manifest(
            Path(args.manifest), "cnr", argv,
            parameters={
                "in": str(in_path),
                "object": [args.object.x, args.object.y, args.object.w, args.object.h],
                "background": args.background,
            },
            seed=None, inputs=[in_path], outputs=[],
            wall_clock_s=wall, throughput_fps=None,
        )
    _emit({"subcommand": "cnr", **{k: repr(v) if isinstance(v, float) else v
                                   for k, v in report.as_dict().items()}})
    return EXIT_OK


def cmd_scan(args) -> int:
    from .demod import frequency_scan

    start = time.perf_counter()
    in_path = Path(args.input)
    out = Path(args.out)
    stream = open_stream(in_path)
    result = frequency_scan(stream, args.region, args.fmin, args.fmax, args.step)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as f:
        f.write("frequency,response\n")
        for freq, resp in zip(result.frequencies, result.response):
            f.write(f"{float(freq)!r},{float(resp)!r}\n")
    wall = time.perf_counter() - start

    peak = int(result.response.argmax())
    argv = ["scan", "--in", str(in_path),
            "--region", f"{args.region.x},{args.region.y},{args.region.w},{args.region.h}",
            "--fmin", repr(args.fmin), "--fmax", repr(args.fmax), "--step", repr(args.step),
            "--out", str(out)]
    manifest_path = Path(args.manifest) if args.manifest else Path(f"{out}.manifest.json")
    _write_manifest(
        manifest_path, "scan", argv,
        parameters={
            "in": str(in_path),
            "region": [args.region.x, args.region.y, args.region.w, args.region.h],
            "fmin": args.fmin, "fmax": args.fmax, "step": args.step,
            "out": str(out),
        },
        seed=None, inputs=[in_path], outputs=[out],
        wall_clock_s=wall, throughput_fps=None,
    )
    _emit({
        "subcommand": "scan",
        "grid_points": len(result.frequencies),
        "peak_frequency": f"{float(result.frequencies[peak]):g}",
        "peak_response": repr(float(result.response[peak])),
        "out": out,
        "manifest": manifest_path,
        "wall_clock_s": f"{wall:.3f}",
    })
    return EXIT_OK


def cmd_bench(args) -> int:
    result = run_benchmark(
        width=args.width,
        height=args.height,
        target_fps=args.fps,
        seconds=args.seconds,
        n_frequencies=args.freqs,
        seed=args.seed if args.seed is not None else DEFAULT_SEED,
    )
    if args.manifest:
        argv = ["bench", "--width", str(args.width), "--height", str(args.height),
                "--fps", repr(args.fps), "--seconds", repr(args.seconds),
                "--freqs", str(args.freqs), "--manifest", str(args.manifest)]
        _write_manifest(
            Path(args.manifest), "bench", argv,
            parameters={
                "width": args.width, "height": args.height, "fps": args.fps,
                "seconds": args.seconds, "freqs": args.freqs,
            },
            seed=args.seed, inputs=[], outputs=[],
            wall_clock_s=result.elapsed_s, throughput_fps=result.frames_per_s,
        )
    _emit({
        "subcommand": "bench",
        "width": result.width,
        "height": result.height,
        "frequencies": result.n_frequencies,
        "frames": result.frames,
        "elapsed_s": f"{result.elapsed_s:.3f}",
        "frames_per_s": f"{result.frames_per_s:.1f}",
        "per_frequency_fps": f"{result.frames_per_s:.1f}",
        "aggregate_pushes_per_s": f"{result.pushes_per_s:.1f}",
        "finalizes": result.finalizes,
        "target_fps": f"{result.target_fps:g}",
        "passed": result.passed,
    })
    return EXIT_OK


def cmd_replay(args) -> int:
    manifest_path = Path(args.manifest)
    with open(manifest_path) as f:
        manifest = json.load(f)
    for path, recorded in manifest.get("inputs", {}).items():
        actual = _sha256(Path(path))
        if actual != recorded:
            raise ValueError(
                f"input {path} changed since the manifest was written "
                f"(sha256 {actual} != recorded {recorded})"
            )
    argv = manifest.get("argv")
    if not isinstance(argv, list) or not argv:
        raise ValueError(f"{manifest_path}: manifest has no usable 'argv' entry")
    print(f"replaying: qld {' '.join(argv)}", file=sys.stderr)
    return main(argv)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qld",
        description="Quadrature lock-in discrimination for image streams.",
    )
    parser.add_argument("--version", action="version", version=f"qld {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("synth", help="synthesize a modulated scene into a QLDS stream")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", help="scene config file")
    source.add_argument("--fig2", nargs=2, metavar=("IMAGE_A", "IMAGE_B"),
                        help="standard two-tone scene: 8-bit PGM patterns "
                             "modulated at 13 and 17 Hz with uniform noise")
    p.add_argument("--reps", type=int, default=5,
                   help="two-tone repetitions of the 221-frame base block (default 5)")
    p.add_argument("--seed", type=int, default=None,
                   help=f"noise seed (default {DEFAULT_SEED}, or the config file's seed)")
    p.add_argument("--bit-depth", type=int, choices=(8, 16), default=16)
    p.add_argument("--out", required=True, help="output .qlds path")
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("demod", help="demodulate a QLDS stream at one or more frequencies")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--freq", type=_parse_freqs, required=True,
                   help="comma-separated demodulation frequencies in Hz")
    p.add_argument("--norm", choices=("two-over-n", "raw"), default="two-over-n")
    p.add_argument("--snapshots", type=float, default=None, metavar="CYCLES",
                   help="also emit per-snapshot CSV every CYCLES modulation cycles")
    p.add_argument("--scale", type=_parse_scale, default=None, metavar="MIN,MAX",
                   help="fixed gray-scale window for PGMs (default: full range)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_demod)

    p = sub.add_parser("cnr", help="contrast-to-noise ratio of an image")
    p.add_argument("--in", dest="input", required=True, help="PGM image (8- or 16-bit)")
    p.add_argument("--object", type=_parse_rect_arg, required=True, metavar="X,Y,W,H")
    p.add_argument("--background", default="auto",
                   help="'auto' for the 8-block layout, or 'x,y,w,h;x,y,w,h;...'")
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_cnr)

    p = sub.add_parser("scan", help="frequency sweep of mean in-region amplitude")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--region", type=_parse_rect_arg, required=True, metavar="X,Y,W,H")
    p.add_argument("--fmin", type=float, required=True)
    p.add_argument("--fmax", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("bench", help="sustained demodulation throughput")
    p.add_argument("--width", type=int, default=600)
    p.add_argument("--height", type=int, default=600)
    p.add_argument("--fps", type=float, default=260.0,
                   help="acquisition rate to sustain (default 260)")
    p.add_argument("--seconds", type=float, default=5.0,
                   help="simulated acquisition duration (default 5)")
    p.add_argument("--freqs", type=int, default=1,
                   help="simultaneous demodulation frequencies (default 1)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--manifest", default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("replay", help="re-run a recorded manifest")
    p.add_argument("manifest", help="manifest.json from a previous run")
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
