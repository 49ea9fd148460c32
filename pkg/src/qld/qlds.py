"""Bit-exact QLDS stream container, plus PGM image import/export.

QLDS byte layout (all integers and the float little-endian):

    offset  size  field
    0       4     magic, exactly b"QLDS"
    4       2     version (u16), currently 1
    6       4     width (u32)
    10      4     height (u32)
    14      4     frame_count (u32)
    18      2     bit_depth (u16), 8 or 16
    20      8     frame_rate (f64, Hz)
    28      ...   payload: frame_count frames in order, each row-major,
                  width*height unsigned samples of bit_depth bits

Frames are yielded lazily on read; a full field recording (tens of
thousands of frames) is never resident in memory at once.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .core import Frame, FrameStream, StreamHeader

MAGIC = b"QLDS"
VERSION = 1
_HEADER = struct.Struct("<4sHIIIHd")
HEADER_SIZE = _HEADER.size  # 28 bytes


class ContainerFormatError(ValueError):
    """Malformed QLDS data; `offset` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def _sample_dtype(bit_depth: int) -> np.dtype:
    return np.dtype("<u1") if bit_depth == 8 else np.dtype("<u2")


def _payload_size(header: StreamHeader) -> int:
    return header.frame_count * header.width * header.height * (header.bit_depth // 8)


def write_stream(path: str | Path, header: StreamHeader, frames: Iterable[Frame]) -> None:
    """Write a stream to `path`; byte layout as documented above.

    Every pixel value must be integer-valued and fit the declared bit depth;
    a violating frame is rejected by index before anything else of it is
    written.
    """
    max_value = (1 << header.bit_depth) - 1
    dtype = _sample_dtype(header.bit_depth)
    path = Path(path)
    count = 0
    try:
        with open(path, "wb") as f:
            f.write(
                _HEADER.pack(
                    MAGIC, VERSION, header.width, header.height,
                    header.frame_count, header.bit_depth, header.frame_rate,
                )
            )
            for frame in frames:
                if frame.index != count:
                    raise ValueError(f"expected frame index {count}, got {frame.index}")
                if frame.pixels.shape != (header.height, header.width):
                    raise ValueError(
                        f"frame {frame.index} shape {frame.pixels.shape} does not match "
                        f"header {header.width}x{header.height}"
                    )
                pixels = frame.pixels
                if pixels.dtype.kind != "u":
                    if not np.all(np.equal(np.floor(pixels), pixels)):
                        raise ValueError(
                            f"frame {frame.index} has non-integer pixel values; "
                            "quantize before writing"
                        )
                if float(pixels.max()) > max_value:
                    raise ValueError(
                        f"frame {frame.index} exceeds {header.bit_depth}-bit range "
                        f"(max value {float(pixels.max())} > {max_value})"
                    )
                f.write(np.ascontiguousarray(pixels, dtype=dtype).tobytes())
                count += 1
    except Exception:
        _discard(path)
        raise
    if count != header.frame_count:
        _discard(path)
        raise ValueError(f"header declares {header.frame_count} frames, got {count}")


def _discard(path: Path) -> None:
    """Remove a partially written file; never masks the original error."""
    try:
        path.unlink(missing_ok=True)
    except OSError:
        pass


def _parse_header(data: bytes, file_size: int) -> StreamHeader:
    if len(data) < HEADER_SIZE:
        raise ContainerFormatError("truncated header", offset=len(data))
    magic, version, width, height, frame_count, bit_depth, frame_rate = _HEADER.unpack(
        data[:HEADER_SIZE]
    )
    if magic != MAGIC:
        raise ContainerFormatError(f"bad magic {magic!r}, expected {MAGIC!r}", offset=0)
    if version != VERSION:
        raise ContainerFormatError(f"unsupported version {version}", offset=4)
    if width == 0:
        raise ContainerFormatError("width must be positive", offset=6)
    if height == 0:
        raise ContainerFormatError("height must be positive", offset=10)
    if frame_count == 0:
        raise ContainerFormatError("frame_count must be positive", offset=14)
    if bit_depth not in (8, 16):
        raise ContainerFormatError(f"bit_depth must be 8 or 16, got {bit_depth}", offset=18)
    if not (frame_rate > 0) or not np.isfinite(frame_rate):
        raise ContainerFormatError(f"frame_rate must be positive, got {frame_rate}", offset=20)
    header = StreamHeader(
        width=width, height=height, frame_count=frame_count,
        frame_rate=frame_rate, bit_depth=bit_depth,
    )
    expected = HEADER_SIZE + _payload_size(header)
    if file_size != expected:
        offset = min(file_size, expected)
        raise ContainerFormatError(
            f"payload length mismatch: file is {file_size} bytes, header implies {expected}",
            offset=offset,
        )
    return header


def read_stream(path: str | Path) -> tuple[StreamHeader, Iterator[Frame]]:
    """Open a QLDS file; returns (header, lazy frame iterator).

    The header and total size are validated up front; frames are then read
    one at a time in order.
    """
    path = Path(path)
    file_size = os.stat(path).st_size
    f = open(path, "rb")
    try:
        header = _parse_header(f.read(HEADER_SIZE), file_size)
    except Exception:
        f.close()
        raise

    def frames() -> Iterator[Frame]:
        dtype = _sample_dtype(header.bit_depth)
        frame_bytes = header.width * header.height * dtype.itemsize
        try:
            for index in range(header.frame_count):
                chunk = f.read(frame_bytes)
                if len(chunk) != frame_bytes:
                    raise ContainerFormatError(
                        f"frame {index} truncated",
                        offset=HEADER_SIZE + index * frame_bytes + len(chunk),
                    )
                pixels = np.frombuffer(chunk, dtype=dtype).reshape(header.height, header.width)
                yield Frame(index=index, pixels=pixels)
        finally:
            f.close()

    return header, frames()


def read_header(path: str | Path) -> StreamHeader:
    """Parse and validate just the header (and total size) of a QLDS file."""
    file_size = os.stat(path).st_size
    with open(path, "rb") as f:
        return _parse_header(f.read(HEADER_SIZE), file_size)


def open_stream(path: str | Path) -> FrameStream:
    """FrameStream view of a QLDS file; every iteration re-opens the file."""
    header = read_header(path)
    return FrameStream(header, lambda: read_stream(path)[1])


def quantize_frame(frame: Frame, bit_depth: int) -> Frame:
    """Round pixel values to the integer grid of `bit_depth` (no rescaling)."""
    max_value = (1 << bit_depth) - 1
    pixels = np.rint(np.asarray(frame.pixels, dtype=np.float64))
    if float(pixels.min()) < 0 or float(pixels.max()) > max_value:
        raise ValueError(
            f"frame {frame.index} does not fit {bit_depth}-bit range after rounding "
            f"([{float(pixels.min())}, {float(pixels.max())}])"
        )
    dtype = np.uint8 if bit_depth == 8 else np.uint16
    return Frame(index=frame.index, pixels=pixels.astype(dtype))


def _image_array(image) -> np.ndarray:
    if isinstance(image, Frame):
        return np.asarray(image.pixels, dtype=np.float64)
    if hasattr(image, "amplitude"):
        return np.asarray(image.amplitude, dtype=np.float64)
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2 or image.size == 0:
        raise ValueError(f"expected a non-empty 2-D image, got shape {image.shape}")
    return image


def export_pgm(image, path: str | Path, scale: tuple[float, float] | None = None) -> None:
    """Save an image (Frame, AmplitudeImage, or array) as binary 16-bit PGM.

    scale=None maps the image's own [min, max] onto [0, 65535] (a constant
    image maps to all zeros); scale=(lo, hi) clamps to [lo, hi] first and
    maps that fixed window, which keeps gray levels comparable across images.
    """
    data = _image_array(image)
    if scale is None:
        lo, hi = float(data.min()), float(data.max())
    else:
        lo, hi = float(scale[0]), float(scale[1])
        if not (lo < hi):
            raise ValueError(f"fixed scale needs min < max, got ({lo}, {hi})")
        data = np.clip(data, lo, hi)
    if hi > lo:
        scaled = np.rint((data - lo) / (hi - lo) * 65535.0)
    else:
        scaled = np.zeros_like(data)
    out = scaled.astype(">u2")
    with open(path, "wb") as f:
        f.write(f"P5\n{data.shape[1]} {data.shape[0]}\n65535\n".encode("ascii"))
        f.write(out.tobytes())


def write_pgm(image: np.ndarray, path: str | Path) -> None:
    """Save integer-valued image data as raw binary PGM (no rescaling).

    Values <= 255 produce an 8-bit file, anything larger a 16-bit one.
    Intended for preparing 8-bit source patterns and test fixtures.
    """
    data = np.asarray(image)
    if data.ndim != 2 or data.size == 0:
        raise ValueError(f"expected a non-empty 2-D image, got shape {data.shape}")
    if np.issubdtype(data.dtype, np.floating):
        if not np.all(np.equal(np.floor(data), data)):
            raise ValueError("pixel values must be integer-valued")
        data = data.astype(np.int64)
    lo, hi = int(data.min()), int(data.max())
    if lo < 0 or hi > 65535:
        raise ValueError(f"pixel values out of PGM range: [{lo}, {hi}]")
    maxval = 255 if hi <= 255 else 65535
    dtype = np.uint8 if maxval == 255 else np.dtype(">u2")
    with open(path, "wb") as f:
        f.write(f"P5\n{data.shape[1]} {data.shape[0]}\n{maxval}\n".encode("ascii"))
        f.write(data.astype(dtype).tobytes())


def read_pgm(path: str | Path) -> np.ndarray:
    """Read a binary (P5) PGM; returns uint8 or uint16 pixel data."""
    raw = Path(path).read_bytes()
    if raw[:2] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: malformed PGM header")
        fields.append(raw[start:pos])
    pos += 1  # single whitespace byte after maxval
    try:
        width, height, maxval = (int(v) for v in fields)
    except ValueError:
        raise ValueError(f"{path}: malformed PGM header") from None
    if width < 1 or height < 1 or not (0 < maxval < 65536):
        raise ValueError(f"{path}: bad PGM dimensions or maxval")
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    expected = width * height * dtype.itemsize
    payload = raw[pos : pos + expected]
    if len(payload) != expected:
        raise ValueError(f"{path}: PGM payload truncated")
    data = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    return data.astype(np.uint16) if maxval >= 256 else data
