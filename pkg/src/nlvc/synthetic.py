"""Deterministic synthetic test videos.

Each generator returns (VideoHeader, frames) for a YUV420 clip. Content
spans the interesting regimes: trivially compressible (constant), smooth
structure (gradient), static but incompressible (frozen noise), low motion
(moving square), and adversarial (fresh noise every frame).
"""

from __future__ import annotations

import numpy as np

from .errors import ContractViolation
from .frame_io import CHROMA_YUV420, FramePlane, FrameYUV420, VideoHeader


def _frame(y: np.ndarray, u: np.ndarray, v: np.ndarray) -> FrameYUV420:
    return FrameYUV420(
        y=FramePlane(y.shape[1], y.shape[0], y),
        u=FramePlane(u.shape[1], u.shape[0], u),
        v=FramePlane(v.shape[1], v.shape[0], v),
    )


def _header(width: int, height: int, frame_count: int) -> VideoHeader:
    return VideoHeader(width, height, CHROMA_YUV420, framerate="25:1",
                       frame_count=frame_count)


def _check_dims(width: int, height: int) -> None:
    if width % 2 or height % 2:
        raise ContractViolation("synthetic clips use 4:2:0, dimensions must be even")


def constant_video(width: int, height: int, frames: int, value: int = 111):
    _check_dims(width, height)
    y = np.full((height, width), value, dtype=np.uint8)
    u = np.full((height // 2, width // 2), 128, dtype=np.uint8)
    v = np.full((height // 2, width // 2), 120, dtype=np.uint8)
    return _header(width, height, frames), [_frame(y, u, v) for _ in range(frames)]


def gradient_video(width: int, height: int, frames: int):
    """Static diagonal luminance ramp with mild chroma ramps."""
    _check_dims(width, height)
    r = np.arange(height).reshape(-1, 1)
    c = np.arange(width).reshape(1, -1)
    y = ((r * 255 // max(height - 1, 1)) + (c * 255 // max(width - 1, 1))) // 2
    y = y.astype(np.uint8)
    cr = np.arange(height // 2).reshape(-1, 1)
    cc = np.arange(width // 2).reshape(1, -1)
    u = (64 + (cr + cc) % 128).astype(np.uint8)
    v = (32 + (cr * 2 + cc) % 160).astype(np.uint8)
    return _header(width, height, frames), [_frame(y, u, v) for _ in range(frames)]


def static_noise_video(width: int, height: int, frames: int, seed: int = 9):
    """One uniform-noise image repeated: high intra cost, zero temporal cost."""
    _check_dims(width, height)
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 256, size=(height, width), dtype=np.uint8)
    u = rng.integers(0, 256, size=(height // 2, width // 2), dtype=np.uint8)
    v = rng.integers(0, 256, size=(height // 2, width // 2), dtype=np.uint8)
    return _header(width, height, frames), [_frame(y, u, v) for _ in range(frames)]


def moving_square_video(width: int, height: int, frames: int,
                        square: int = 12, step: int = 2, seed: int = 5):
    """A bright square marching diagonally over a fixed gradient background."""
    _check_dims(width, height)
    _, base_frames = gradient_video(width, height, 1)
    base = base_frames[0]
    rng = np.random.default_rng(seed)
    texture = rng.integers(0, 24, size=(square, square), dtype=np.uint8)
    out = []
    for t in range(frames):
        y = base.y.samples.copy()
        top = (5 + t * step) % max(height - square, 1)
        left = (3 + t * step) % max(width - square, 1)
        y[top:top + square, left:left + square] = 220 - texture
        u = base.u.samples.copy()
        v = base.v.samples.copy()
        ctop, cleft = top // 2, left // 2
        cs = square // 2
        u[ctop:ctop + cs, cleft:cleft + cs] = 90
        v[ctop:ctop + cs, cleft:cleft + cs] = 180
        out.append(_frame(y, u, v))
    return _header(width, height, frames), out


def random_video(width: int, height: int, frames: int, seed: int = 17):
    """Fresh uniform noise every frame: the incompressible worst case."""
    _check_dims(width, height)
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(frames):
        y = rng.integers(0, 256, size=(height, width), dtype=np.uint8)
        u = rng.integers(0, 256, size=(height // 2, width // 2), dtype=np.uint8)
        v = rng.integers(0, 256, size=(height // 2, width // 2), dtype=np.uint8)
        out.append(_frame(y, u, v))
    return _header(width, height, frames), out


def fixture_suite() -> dict[str, tuple[VideoHeader, list[FrameYUV420]]]:
    """The standing verification set: five content types, two geometries.

    96x96 exercises the multi-patch path; 50x40 exercises edge-replication
    padding on every plane.
    """
    return {
        "constant_96x96": constant_video(96, 96, 8),
        "gradient_96x96": gradient_video(96, 96, 8),
        "static_noise_96x96": static_noise_video(96, 96, 8),
        "moving_square_96x96": moving_square_video(96, 96, 8),
        "random_50x40": random_video(50, 40, 8),
        "moving_square_50x40": moving_square_video(50, 40, 8, square=8),
    }
