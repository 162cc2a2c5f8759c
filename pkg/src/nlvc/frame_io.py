"""Y4M parsing and emission over raw YUV420 / mono planes.

The codec operates directly on the 8-bit planar samples; nothing here
converts color. Header tags are kept verbatim so a parse -> emit cycle is
byte-faithful.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import BinaryIO, Optional

import numpy as np

from .errors import (
    ContractViolation,
    TruncatedStreamError,
    UnsupportedFormatError,
    Y4MParseError,
)

Y4M_SIGNATURE = b"YUV4MPEG2"
FRAME_MARKER = b"FRAME"

CHROMA_YUV420 = "yuv420"
CHROMA_MONO = "mono"

# Y4M colourspace tags treated as plain 8-bit 4:2:0 sample layout. Chroma
# siting differences do not affect lossless sample coding.
_C420_FAMILY = {"420", "420jpeg", "420paldv", "420mpeg2"}

_MAX_HEADER_LINE = 8192


@dataclass(frozen=True)
class FramePlane:
    """One 8-bit plane, samples stored as a (height, width) uint8 array."""

    width: int
    height: int
    samples: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ContractViolation("plane dimensions must be positive")
        if self.samples.shape != (self.height, self.width):
            raise ContractViolation(
                f"plane samples shape {self.samples.shape} does not match "
                f"{self.height}x{self.width}"
            )
        if self.samples.dtype != np.uint8:
            raise ContractViolation("plane samples must be uint8")


@dataclass(frozen=True)
class FrameYUV420:
    """One decoded frame. u/v are None for mono input."""

    y: FramePlane
    u: Optional[FramePlane] = None
    v: Optional[FramePlane] = None

    def __post_init__(self):
        if (self.u is None) != (self.v is None):
            raise ContractViolation("u and v planes must both be present or absent")
        if self.u is not None:
            if (self.u.width, self.u.height) != (self.v.width, self.v.height):
                raise ContractViolation("u and v planes must have identical dimensions")

    @property
    def planes(self) -> tuple[FramePlane, ...]:
        if self.u is None:
            return (self.y,)
        return (self.y, self.u, self.v)


@dataclass(frozen=True)
class VideoHeader:
    """Parsed Y4M stream header.

    `tags` holds every token after the signature verbatim, in order, so
    emission reproduces the original header line exactly. `frame_count`
    is unknown (None) for streamed input; the container format records it
    separately.
    """

    width: int
    height: int
    chroma: str
    framerate: str = "25:1"
    frame_count: Optional[int] = None
    tags: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ContractViolation("frame dimensions must be positive")
        if self.chroma not in (CHROMA_YUV420, CHROMA_MONO):
            raise ContractViolation(f"unknown chroma mode {self.chroma!r}")
        if not self.tags:
            object.__setattr__(self, "tags", self._canonical_tags())

    def _canonical_tags(self) -> tuple[str, ...]:
        ctag = "C420" if self.chroma == CHROMA_YUV420 else "Cmono"
        return (f"W{self.width}", f"H{self.height}", f"F{self.framerate}", ctag)

    @property
    def chroma_size(self) -> tuple[int, int]:
        """(width, height) of the U/V planes; (0, 0) for mono."""
        if self.chroma == CHROMA_MONO:
            return (0, 0)
        return ((self.width + 1) // 2, (self.height + 1) // 2)

    @property
    def frame_payload_bytes(self) -> int:
        cw, ch = self.chroma_size
        return self.width * self.height + 2 * cw * ch

    @property
    def raw_bits_per_frame(self) -> int:
        return self.frame_payload_bytes * 8


def _read_line(stream: BinaryIO, what: str, base_offset: int = 0) -> bytes:
    """Read bytes up to and excluding a newline; error out on EOF or overrun."""
    buf = bytearray()
    while True:
        b = stream.read(1)
        if not b:
            raise Y4MParseError(f"stream ended inside {what}", base_offset + len(buf))
        if b == b"\n":
            return bytes(buf)
        buf += b
        if len(buf) > _MAX_HEADER_LINE:
            raise Y4MParseError(f"{what} exceeds {_MAX_HEADER_LINE} bytes", base_offset + len(buf))


def parse_y4m_header(stream: BinaryIO) -> VideoHeader:
    """Parse the signature line, leaving the stream at the first FRAME marker."""
    line = _read_line(stream, "Y4M signature line")
    if not line.startswith(Y4M_SIGNATURE):
        # Report the first byte that diverges from the expected signature.
        mismatch = len(line)
        for i, (got, want) in enumerate(zip(line, Y4M_SIGNATURE)):
            if got != want:
                mismatch = i
                break
        raise Y4MParseError("not a YUV4MPEG2 stream", min(mismatch, len(Y4M_SIGNATURE)))

    rest = line[len(Y4M_SIGNATURE):]
    if rest and not rest.startswith(b" "):
        raise Y4MParseError("signature not followed by a space", len(Y4M_SIGNATURE))

    try:
        tag_text = rest.decode("ascii")
    except UnicodeDecodeError as exc:
        raise Y4MParseError("non-ASCII bytes in header", len(Y4M_SIGNATURE)) from exc

    tags = tuple(t for t in tag_text.split(" ") if t)
    width = height = None
    framerate = "25:1"
    ctag = "420"
    for tag in tags:
        key, value = tag[0], tag[1:]
        if key == "W":
            width = int(value)
        elif key == "H":
            height = int(value)
        elif key == "F":
            framerate = value
        elif key == "C":
            ctag = value
        # I/A/X and any unknown tags ride along in `tags` untouched.

    if width is None or height is None:
        raise Y4MParseError("header missing W or H tag", len(line))

    if ctag in _C420_FAMILY:
        chroma = CHROMA_YUV420
    elif ctag == "mono":
        chroma = CHROMA_MONO
    else:
        raise UnsupportedFormatError(
            f"unsupported colourspace C{ctag}; only the C420 family and Cmono are handled"
        )
    if chroma == CHROMA_YUV420 and (width % 2 or height % 2):
        raise UnsupportedFormatError(
            f"odd dimensions {width}x{height} are ambiguous for 4:2:0 input"
        )

    return VideoHeader(width=width, height=height, chroma=chroma,
                       framerate=framerate, tags=tags)


def _read_exact(stream: BinaryIO, n: int, what: str) -> bytes:
    data = stream.read(n)
    if len(data) != n:
        raise TruncatedStreamError(f"short read in {what}", n, len(data))
    return data


def read_frame(stream: BinaryIO, header: VideoHeader) -> Optional[FrameYUV420]:
    """Read one frame, or return None at a clean end of stream."""
    first = stream.read(1)
    if not first:
        return None
    line = first + _read_line(stream, "FRAME marker", base_offset=1)
    if not line.startswith(FRAME_MARKER):
        raise Y4MParseError("expected FRAME marker", 0)
    # Parameters after FRAME (rare) are consumed and ignored.

    w, h = header.width, header.height
    y = np.frombuffer(_read_exact(stream, w * h, "Y plane"), dtype=np.uint8)
    y_plane = FramePlane(w, h, y.reshape(h, w).copy())
    if header.chroma == CHROMA_MONO:
        return FrameYUV420(y=y_plane)

    cw, ch = header.chroma_size
    u = np.frombuffer(_read_exact(stream, cw * ch, "U plane"), dtype=np.uint8)
    v = np.frombuffer(_read_exact(stream, cw * ch, "V plane"), dtype=np.uint8)
    return FrameYUV420(
        y=y_plane,
        u=FramePlane(cw, ch, u.reshape(ch, cw).copy()),
        v=FramePlane(cw, ch, v.reshape(ch, cw).copy()),
    )


def write_y4m_header(sink: BinaryIO, header: VideoHeader) -> None:
    line = b" ".join([Y4M_SIGNATURE] + [t.encode("ascii") for t in header.tags])
    sink.write(line + b"\n")


def write_frame(sink: BinaryIO, header: VideoHeader, frame: FrameYUV420) -> None:
    """Append one FRAME record. Validates dimensions before any byte is written."""
    if (frame.y.width, frame.y.height) != (header.width, header.height):
        raise ContractViolation(
            f"Y plane {frame.y.width}x{frame.y.height} does not match header "
            f"{header.width}x{header.height}"
        )
    if header.chroma == CHROMA_YUV420:
        if frame.u is None:
            raise ContractViolation("yuv420 frame is missing chroma planes")
        cw, ch = header.chroma_size
        if (frame.u.width, frame.u.height) != (cw, ch):
            raise ContractViolation(
                f"chroma plane {frame.u.width}x{frame.u.height} does not match "
                f"expected {cw}x{ch}"
            )
    elif frame.u is not None:
        raise ContractViolation("mono frame must not carry chroma planes")

    sink.write(FRAME_MARKER + b"\n")
    for plane in frame.planes:
        sink.write(plane.samples.tobytes())


def read_y4m(path) -> tuple[VideoHeader, list[FrameYUV420]]:
    with open(path, "rb") as f:
        header = parse_y4m_header(f)
        frames = []
        while (frame := read_frame(f, header)) is not None:
            frames.append(frame)
    return header, frames


def write_y4m(path, header: VideoHeader, frames) -> None:
    with open(path, "wb") as f:
        write_y4m_header(f, header)
        for frame in frames:
            write_frame(f, header, frame)
