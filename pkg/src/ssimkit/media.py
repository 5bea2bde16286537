"""Reading and writing the media and report formats the CLI speaks.

Supported media: YUV4MPEG2 (Y4M), headerless planar YUV with out-of-band
dimensions, and binary PNM (P5/P6). Frames are yielded lazily, one at a time.
Raw multi-byte samples are little-endian; PNM 16-bit is big-endian per its
own convention. Reports are JSON-lines or CSV with deterministic field order
and floats rendered to 9 significant digits.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import IO, Callable, Iterable, Iterator, Mapping, Optional, Sequence, Union

import numpy as np

from .errors import (
    BadHeader,
    BadMagic,
    SizeNotMultiple,
    TruncatedFrame,
    UnsupportedChroma,
    UnsupportedMaxval,
    ValidationError,
)
from .frames import CHROMA_420, CHROMA_444, SPACE_RGB, SPACE_YCBCR, ColorFrame, LumaPlane

Y4M_MAGIC = b"YUV4MPEG2"

# Y4M chroma tags we accept; the three 420 variants differ only in siting,
# which does not affect plane sizes.
_Y4M_CHROMA = {
    "420": CHROMA_420,
    "420jpeg": CHROMA_420,
    "420mpeg2": CHROMA_420,
    "444": CHROMA_444,
    "mono": "mono",
}

FrameType = Union[LumaPlane, ColorFrame]


@dataclass(frozen=True)
class StreamHeader:
    width: int
    height: int
    frame_rate: tuple[int, int]
    chroma: str  # "420" | "444" | "mono"
    bit_depth: int = 8

    @property
    def fps(self) -> float:
        return self.frame_rate[0] / self.frame_rate[1]


class VideoStream:
    """A stream header plus a lazy, single-pass frame iterator."""

    def __init__(self, header: StreamHeader, frames: Callable[[], Iterator[FrameType]]):
        self.header = header
        self._frames = frames

    def __iter__(self) -> Iterator[FrameType]:
        return self._frames()

    def luma_frames(self) -> Iterator[LumaPlane]:
        for frame in self:
            yield frame if isinstance(frame, LumaPlane) else LumaPlane(frame.channels[0], frame.bit_depth)


def _chroma_dims(width: int, height: int, chroma: str) -> tuple[int, int]:
    if chroma == CHROMA_420:
        return (-(-width // 2), -(-height // 2))
    return (width, height)


def _plane_bytes(width: int, height: int, bit_depth: int) -> int:
    return width * height * (1 if bit_depth <= 8 else 2)


def _read_plane(fh: IO[bytes], width: int, height: int, bit_depth: int) -> Optional[np.ndarray]:
    nbytes = _plane_bytes(width, height, bit_depth)
    raw = fh.read(nbytes)
    if not raw:
        return None
    if len(raw) < nbytes:
        raise TruncatedFrame(f"plane needs {nbytes} bytes, stream had {len(raw)}")
    dtype = np.uint8 if bit_depth <= 8 else np.dtype("<u2")
    return np.frombuffer(raw, dtype=dtype).reshape(height, width)


def read_y4m(path: Union[str, os.PathLike]) -> VideoStream:
    """Open a YUV4MPEG2 file as a lazy video stream."""
    with open(path, "rb") as fh:
        magic = fh.read(len(Y4M_MAGIC))
        if magic != Y4M_MAGIC:
            raise BadMagic(f"{path}: not a YUV4MPEG2 stream")
        header_line = _read_line(fh)
    header = _parse_y4m_header(header_line)

    def frames() -> Iterator[FrameType]:
        with open(path, "rb") as fh:
            fh.read(len(Y4M_MAGIC))
            _read_line(fh)
            while True:
                marker = _read_line(fh)
                if marker is None:
                    return
                if not marker.startswith("FRAME"):
                    raise BadHeader(f"expected FRAME marker, got {marker[:20]!r}")
                frame = _read_frame_planes(fh, header)
                if frame is None:
                    raise TruncatedFrame("FRAME marker with no payload")
                yield frame

    return VideoStream(header, frames)


def _read_line(fh: IO[bytes]) -> Optional[str]:
    chars = bytearray()
    while True:
        c = fh.read(1)
        if not c:
            return None if not chars else chars.decode("ascii", "replace")
        if c == b"\n":
            return chars.decode("ascii", "replace")
        chars.extend(c)
        if len(chars) > 512:
            raise BadHeader("unterminated header line")


def _parse_y4m_header(line: Optional[str]) -> StreamHeader:
    if line is None:
        raise BadHeader("missing stream header")
    width = height = None
    rate = (30, 1)
    chroma = CHROMA_420  # Y4M default when no C tag is present
    for token in line.split(" "):
        if not token:
            continue
        tag, val = token[0], token[1:]
        if tag == "W":
            width = int(val)
        elif tag == "H":
            height = int(val)
        elif tag == "F":
            num, _, den = val.partition(":")
            rate = (int(num), int(den or "1"))
        elif tag == "C":
            if val not in _Y4M_CHROMA:
                raise UnsupportedChroma(f"chroma tag C{val} is not supported")
            chroma = _Y4M_CHROMA[val]
        elif tag in ("I", "A", "X"):
            continue  # interlacing, aspect, comments: irrelevant to scoring
        else:
            raise BadHeader(f"unknown header token {token!r}")
    if not width or not height or width <= 0 or height <= 0:
        raise BadHeader(f"header lacks valid dimensions: {line!r}")
    return StreamHeader(width, height, rate, chroma, 8)


def _read_frame_planes(fh: IO[bytes], header: StreamHeader) -> Optional[FrameType]:
    y = _read_plane(fh, header.width, header.height, header.bit_depth)
    if y is None:
        return None
    if header.chroma == "mono":
        return LumaPlane(y, header.bit_depth)
    cw, ch = _chroma_dims(header.width, header.height, header.chroma)
    cb = _read_plane(fh, cw, ch, header.bit_depth)
    cr = _read_plane(fh, cw, ch, header.bit_depth)
    if cb is None or cr is None:
        raise TruncatedFrame("frame payload ended inside the chroma planes")
    return ColorFrame((y, cb, cr), SPACE_YCBCR, header.chroma, header.bit_depth)


def read_planar_raw(
    path: Union[str, os.PathLike],
    width: int,
    height: int,
    bit_depth: int = 8,
    chroma: str = CHROMA_420,
    frame_rate: tuple[int, int] = (30, 1),
) -> VideoStream:
    """Open a headerless planar YUV file; dimensions come from the caller."""
    if width <= 0 or height <= 0:
        raise ValidationError("dimensions must be positive")
    if chroma not in (CHROMA_420, CHROMA_444, "mono", "400"):
        raise UnsupportedChroma(f"chroma {chroma!r} not supported for raw input")
    if chroma == "400":
        chroma = "mono"
    y_bytes = _plane_bytes(width, height, bit_depth)
    if chroma == "mono":
        frame_bytes = y_bytes
    else:
        cw, ch = _chroma_dims(width, height, chroma)
        frame_bytes = y_bytes + 2 * _plane_bytes(cw, ch, bit_depth)
    size = os.path.getsize(path)
    if size == 0 or size % frame_bytes != 0:
        raise SizeNotMultiple(f"{path}: {size} bytes is not a whole number of {frame_bytes}-byte frames")
    header = StreamHeader(width, height, frame_rate, chroma, bit_depth)

    def frames() -> Iterator[FrameType]:
        with open(path, "rb") as fh:
            while True:
                frame = _read_frame_planes(fh, header)
                if frame is None:
                    return
                yield frame

    return VideoStream(header, frames)


def read_pnm(path: Union[str, os.PathLike]) -> FrameType:
    """Read a binary PNM image: P5 -> LumaPlane, P6 -> RGB ColorFrame."""
    with open(path, "rb") as fh:
        data = fh.read()
    fields, offset = _pnm_header_fields(data, path)
    kind, width, height, maxval = fields
    if maxval <= 0 or maxval > 65535:
        raise UnsupportedMaxval(f"maxval {maxval} outside (0, 65535]")
    bit_depth = 8 if maxval <= 255 else 16
    dtype = np.uint8 if bit_depth == 8 else np.dtype(">u2")  # PNM 16-bit is big-endian
    channels = 1 if kind == "P5" else 3
    count = width * height * channels
    payload = np.frombuffer(data, dtype=dtype, count=count, offset=offset)
    if payload.size < count:
        raise TruncatedFrame(f"{path}: expected {count} samples, found {payload.size}")
    if kind == "P5":
        return LumaPlane(payload.reshape(height, width), bit_depth)
    rgb = payload.reshape(height, width, 3)
    return ColorFrame(
        (rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]), SPACE_RGB, CHROMA_444, bit_depth
    )


def _pnm_header_fields(data: bytes, path) -> tuple[tuple[str, int, int, int], int]:
    if data[:2] not in (b"P5", b"P6"):
        raise BadHeader(f"{path}: not a binary P5/P6 PNM file")
    kind = data[:2].decode()
    fields: list[int] = []
    i = 2
    while len(fields) < 3:
        if i >= len(data):
            raise BadHeader(f"{path}: truncated PNM header")
        c = data[i : i + 1]
        if c == b"#":
            while i < len(data) and data[i : i + 1] != b"\n":
                i += 1
        elif c.isspace():
            i += 1
        elif c.isdigit():
            j = i
            while j < len(data) and data[j : j + 1].isdigit():
                j += 1
            fields.append(int(data[i:j]))
            i = j
        else:
            raise BadHeader(f"{path}: unexpected byte {c!r} in PNM header")
    i += 1  # single whitespace byte after maxval
    width, height, maxval = fields
    if width <= 0 or height <= 0:
        raise BadHeader(f"{path}: bad dimensions {width}x{height}")
    return (kind, width, height, maxval), i


# ---------------------------------------------------------------------------
# writers (round-trip partners of the readers; also used by tests)
# ---------------------------------------------------------------------------

def write_y4m(path: Union[str, os.PathLike], frames: Iterable[FrameType], header: StreamHeader) -> None:
    with open(path, "wb") as fh:
        tag = {"420": " C420", "444": " C444", "mono": " Cmono"}[header.chroma]
        fh.write(
            Y4M_MAGIC
            + f" W{header.width} H{header.height} F{header.frame_rate[0]}:{header.frame_rate[1]}{tag}\n".encode()
        )
        for frame in frames:
            fh.write(b"FRAME\n")
            _write_frame_planes(fh, frame, header.bit_depth)


def write_planar_raw(path: Union[str, os.PathLike], frames: Iterable[FrameType], bit_depth: int = 8) -> None:
    with open(path, "wb") as fh:
        for frame in frames:
            _write_frame_planes(fh, frame, bit_depth)


def _write_frame_planes(fh: IO[bytes], frame: FrameType, bit_depth: int) -> None:
    dtype = np.uint8 if bit_depth <= 8 else np.dtype("<u2")
    planes = [frame.samples] if isinstance(frame, LumaPlane) else list(frame.channels)
    for plane in planes:
        fh.write(np.ascontiguousarray(plane, dtype=dtype).tobytes())


def write_pnm(path: Union[str, os.PathLike], image: FrameType) -> None:
    if isinstance(image, LumaPlane):
        kind, planes, bit_depth = b"P5", [image.samples], image.bit_depth
        h, w = image.samples.shape
    else:
        image.require_space(SPACE_RGB)
        kind, planes, bit_depth = b"P6", list(image.channels), image.bit_depth
        h, w = image.height, image.width
    maxval = (1 << bit_depth) - 1
    dtype = np.uint8 if bit_depth <= 8 else np.dtype(">u2")
    with open(path, "wb") as fh:
        fh.write(kind + f"\n{w} {h}\n{maxval}\n".encode())
        stacked = np.stack([np.asarray(p) for p in planes], axis=-1)
        fh.write(np.ascontiguousarray(stacked, dtype=dtype).tobytes())


# ---------------------------------------------------------------------------
# report writer
# ---------------------------------------------------------------------------

def format_float(x: float) -> str:
    """Floats at 9 significant digits with trailing zeros kept (1 -> 1.00000000)."""
    return format(float(x), "#.9g")


def _render_csv(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return "" if value != value else format_float(value)
    return str(value)


def _render_json(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "null" if value != value else format_float(value)
    if isinstance(value, int):
        return str(value)
    return json.dumps(str(value))


def write_report(
    records: Sequence[Mapping],
    fmt: str = "jsonl",
    fields: Optional[Sequence[str]] = None,
) -> bytes:
    """Serialize records (one frame each) with a deterministic field order.

    ``fields`` fixes the schema; it defaults to the first record's keys. CSV
    output always carries exactly one header row, including for no records.
    """
    if fmt not in ("jsonl", "csv"):
        raise ValidationError(f"unknown report format {fmt!r}")
    if fields is None:
        if not records:
            raise ValidationError("empty record list needs an explicit field list")
        fields = list(records[0].keys())
    for i, rec in enumerate(records):
        if set(rec.keys()) != set(fields):
            raise ValidationError(f"record {i} does not match the report schema {list(fields)}")
    lines: list[str] = []
    if fmt == "csv":
        lines.append(",".join(fields))
        for rec in records:
            lines.append(",".join(_render_csv(rec[f]) for f in fields))
    else:
        for rec in records:
            body = ", ".join(f"{json.dumps(f)}: {_render_json(rec[f])}" for f in fields)
            lines.append("{" + body + "}")
    return ("\n".join(lines) + "\n").encode()
