"""Human-readable key-value config files describing synthetic scenes.

Format: INI-like sections with `key = value` lines, `#`/`;` comments.
The `[scene]` section is required; `[noise]` is optional; `[layer]` may
repeat. Layer base images are given as one of

    base = uniform:<value>              constant pattern
    base = rect:<x>,<y>,<w>,<h>,<value> value inside the rectangle, 0 outside
    base = pgm:<path>                   binary PGM (P5), 8- or 16-bit
    base = npy:<path>                   numpy .npy array (exact float values)

Relative paths resolve against the config file's directory. Parse errors
carry the offending line number.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .core import Rect
from .scene import NoiseKind, NoiseSpec, SceneSpec, SourceLayer


class SceneConfigError(ValueError):
    """Config file error, annotated with the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


_SCENE_KEYS = {"width", "height", "frame_rate", "frame_count", "clamp"}
_NOISE_KEYS = {"kind", "low", "high", "mean", "sigma", "seed"}
_LAYER_KEYS = {"frequency", "phase", "offset", "base"}


def _split_sections(text: str):
    """Yield (section_name, start_line, {key: (value, line)}) in file order."""
    sections = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise SceneConfigError(lineno, f"malformed section header {line!r}")
            name = line[1:-1].strip().lower()
            if name not in ("scene", "noise", "layer"):
                raise SceneConfigError(lineno, f"unknown section [{name}]")
            current = (name, lineno, {})
            sections.append(current)
            continue
        if "=" not in line:
            raise SceneConfigError(lineno, f"expected 'key = value', got {line!r}")
        if current is None:
            raise SceneConfigError(lineno, "key before any section header")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        allowed = {"scene": _SCENE_KEYS, "noise": _NOISE_KEYS, "layer": _LAYER_KEYS}[current[0]]
        if key not in allowed:
            raise SceneConfigError(lineno, f"unknown key {key!r} in [{current[0]}]")
        if key in current[2]:
            raise SceneConfigError(lineno, f"duplicate key {key!r}")
        current[2][key] = (value, lineno)
    return sections


def _require(keys: dict, name: str, section: str, section_line: int) -> tuple[str, int]:
    if name not in keys:
        raise SceneConfigError(section_line, f"[{section}] section missing key {name!r}")
    return keys[name]


def _parse_number(value: str, line: int, kind=float):
    try:
        return kind(value)
    except ValueError:
        raise SceneConfigError(line, f"expected a number, got {value!r}") from None


def _parse_base(value: str, line: int, shape: tuple[int, int], base_dir: Path) -> np.ndarray:
    form, _, arg = value.partition(":")
    form = form.strip().lower()
    if form == "uniform":
        level = _parse_number(arg, line)
        return np.full(shape, level)
    if form == "rect":
        parts = [p.strip() for p in arg.split(",")]
        if len(parts) != 5:
            raise SceneConfigError(line, f"rect base needs x,y,w,h,value, got {arg!r}")
        try:
            rect = Rect(*(int(p) for p in parts[:4]))
        except ValueError as exc:
            raise SceneConfigError(line, str(exc)) from None
        level = _parse_number(parts[4], line)
        if not rect.within(shape[1], shape[0]):
            raise SceneConfigError(line, f"rect {rect} exceeds scene bounds")
        base = np.zeros(shape)
        base[rect.slices()] = level
        return base
    if form in ("pgm", "npy"):
        path = base_dir / arg
        if not path.is_file():
            raise SceneConfigError(line, f"base image not found: {path}")
        if form == "npy":
            base = np.load(path)
        else:
            from .qlds import read_pgm

            base = read_pgm(path).astype(np.float64)
        if base.shape != shape:
            raise SceneConfigError(
                line, f"base image shape {base.shape} does not match scene {shape}"
            )
        return np.asarray(base, dtype=np.float64)
    raise SceneConfigError(line, f"unknown base form {form!r} (use uniform/rect/pgm/npy)")


def parse_scene_config(text: str, base_dir: str | Path = ".") -> SceneSpec:
    """Parse config text into a SceneSpec; raises SceneConfigError with line numbers."""
    base_dir = Path(base_dir)
    sections = _split_sections(text)
    scene_sections = [s for s in sections if s[0] == "scene"]
    if not scene_sections:
        raise SceneConfigError(1, "missing required [scene] section")
    if len(scene_sections) > 1:
        raise SceneConfigError(scene_sections[1][1], "duplicate [scene] section")
    noise_sections = [s for s in sections if s[0] == "noise"]
    if len(noise_sections) > 1:
        raise SceneConfigError(noise_sections[1][1], "duplicate [noise] section")

    _, scene_line, keys = scene_sections[0]

    def scene_key(name: str, kind=float):
        value, line = _require(keys, name, "scene", scene_line)
        return _parse_number(value, line, kind)

    width = scene_key("width", int)
    height = scene_key("height", int)
    frame_rate = scene_key("frame_rate")
    frame_count = scene_key("frame_count", int)
    clamp = None
    if "clamp" in keys:
        value, line = keys["clamp"]
        if value.lower() != "none":
            parts = value.split(",")
            if len(parts) != 2:
                raise SceneConfigError(line, f"clamp needs 'min,max' or 'none', got {value!r}")
            clamp = (_parse_number(parts[0], line), _parse_number(parts[1], line))

    noise = NoiseSpec.none()
    if noise_sections:
        _, noise_line, nkeys = noise_sections[0]
        kind_value, kind_line = _require(nkeys, "kind", "noise", noise_line)
        kind_value = kind_value.lower()
        seed = 0
        if "seed" in nkeys:
            seed = _parse_number(nkeys["seed"][0], nkeys["seed"][1], int)
        if kind_value == "none":
            noise = NoiseSpec.none()
        elif kind_value == "uniform":
            low = _parse_number(*_require(nkeys, "low", "noise", noise_line))
            high = _parse_number(*_require(nkeys, "high", "noise", noise_line))
            noise = NoiseSpec.uniform(low, high, seed=seed)
        elif kind_value == "gaussian":
            mean = _parse_number(*_require(nkeys, "mean", "noise", noise_line))
            sigma = _parse_number(*_require(nkeys, "sigma", "noise", noise_line))
            noise = NoiseSpec.gaussian(mean, sigma, seed=seed)
        else:
            raise SceneConfigError(kind_line, f"unknown noise kind {kind_value!r}")

    shape = (height, width)
    layers = []
    for name, section_line, lkeys in sections:
        if name != "layer":
            continue
        frequency = _parse_number(*_require(lkeys, "frequency", "layer", section_line))
        phase = _parse_number(*lkeys["phase"]) if "phase" in lkeys else 0.0
        offset = _parse_number(*lkeys["offset"]) if "offset" in lkeys else 0.0
        base_value, base_line = _require(lkeys, "base", "layer", section_line)
        base = _parse_base(base_value, base_line, shape, base_dir)
        try:
            layers.append(SourceLayer(base_image=base, frequency=frequency,
                                      phase=phase, offset=offset))
        except ValueError as exc:
            raise SceneConfigError(section_line, str(exc)) from None

    try:
        return SceneSpec(
            width=width,
            height=height,
            frame_rate=frame_rate,
            frame_count=frame_count,
            layers=tuple(layers),
            noise=noise,
            clamp=clamp,
        )
    except ValueError as exc:
        raise SceneConfigError(scene_line, str(exc)) from None


def load_scene_config(path: str | Path) -> SceneSpec:
    path = Path(path)
    return parse_scene_config(path.read_text(), base_dir=path.parent)


def save_scene_config(spec: SceneSpec, path: str | Path) -> None:
    """Write a spec as a config file; non-constant base images go to .npy sidecars."""
    path = Path(path)
    lines = [
        "[scene]",
        f"width = {spec.width}",
        f"height = {spec.height}",
        f"frame_rate = {spec.frame_rate!r}",
        f"frame_count = {spec.frame_count}",
    ]
    if spec.clamp is not None:
        lines.append(f"clamp = {spec.clamp[0]!r},{spec.clamp[1]!r}")
    lines.append("")
    if spec.noise.kind is not NoiseKind.NONE:
        lines.append("[noise]")
        lines.append(f"kind = {spec.noise.kind.value}")
        if spec.noise.kind is NoiseKind.UNIFORM:
            lines.append(f"low = {spec.noise.low!r}")
            lines.append(f"high = {spec.noise.high!r}")
        else:
            lines.append(f"mean = {spec.noise.mean!r}")
            lines.append(f"sigma = {spec.noise.sigma!r}")
        lines.append(f"seed = {spec.noise.seed}")
        lines.append("")
    for i, layer in enumerate(spec.layers):
        lines.append("[layer]")
        lines.append(f"frequency = {layer.frequency!r}")
        if layer.phase != 0:
            lines.append(f"phase = {layer.phase!r}")
        if layer.offset != 0:
            lines.append(f"offset = {layer.offset!r}")
        base = layer.base_image
        if np.all(base == base.flat[0]):
            lines.append(f"base = uniform:{base.flat[0]!r}")
        else:
            sidecar = f"{path.stem}.layer{i}.npy"
            np.save(path.parent / sidecar, base)
            lines.append(f"base = npy:{sidecar}")
        lines.append("")
    path.write_text("\n".join(lines))
