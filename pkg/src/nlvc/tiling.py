"""Edge-replicated padding to multiples of 32 and exact 32x32 patch tiling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation
from .frame_io import FramePlane

PATCH_SIDE = 32
PATCH_TOKENS = PATCH_SIDE * PATCH_SIDE


@dataclass(frozen=True)
class Patch:
    """A 32x32 tile. Origin coordinates are multiples of 32 in the padded plane."""

    origin_row: int
    origin_col: int
    samples: np.ndarray

    def __post_init__(self):
        if self.origin_row % PATCH_SIDE or self.origin_col % PATCH_SIDE:
            raise ContractViolation("patch origin must be a multiple of 32")
        if self.samples.shape != (PATCH_SIDE, PATCH_SIDE):
            raise ContractViolation(f"patch must be {PATCH_SIDE}x{PATCH_SIDE}")


@dataclass(frozen=True)
class TilingLayout:
    plane_width: int
    plane_height: int
    padded_width: int
    padded_height: int
    patches_per_row: int
    patches_per_col: int

    @property
    def patch_count(self) -> int:
        return self.patches_per_row * self.patches_per_col


def _round_up(n: int, multiple: int) -> int:
    return ((n + multiple - 1) // multiple) * multiple


def layout_for(width: int, height: int) -> TilingLayout:
    if width < 1 or height < 1:
        raise ContractViolation("plane dimensions must be positive")
    pw = _round_up(width, PATCH_SIDE)
    ph = _round_up(height, PATCH_SIDE)
    return TilingLayout(
        plane_width=width,
        plane_height=height,
        padded_width=pw,
        padded_height=ph,
        patches_per_row=pw // PATCH_SIDE,
        patches_per_col=ph // PATCH_SIDE,
    )


def pad_plane(plane: FramePlane) -> tuple[FramePlane, TilingLayout]:
    """Extend the plane to multiples of 32 by repeating the last row/column."""
    layout = layout_for(plane.width, plane.height)
    padded = np.pad(
        plane.samples,
        ((0, layout.padded_height - plane.height), (0, layout.padded_width - plane.width)),
        mode="edge",
    )
    return FramePlane(layout.padded_width, layout.padded_height, padded), layout


def extract_patches(padded: FramePlane, layout: TilingLayout) -> list[Patch]:
    """Split the padded plane into patches, raster order of origins."""
    if (padded.width, padded.height) != (layout.padded_width, layout.padded_height):
        raise ContractViolation(
            f"padded plane {padded.width}x{padded.height} does not match layout "
            f"{layout.padded_width}x{layout.padded_height}"
        )
    patches = []
    for r in range(layout.patches_per_col):
        for c in range(layout.patches_per_row):
            top, left = r * PATCH_SIDE, c * PATCH_SIDE
            tile = padded.samples[top:top + PATCH_SIDE, left:left + PATCH_SIDE]
            patches.append(Patch(top, left, np.ascontiguousarray(tile)))
    return patches


def reassemble(patches: list[Patch], layout: TilingLayout) -> FramePlane:
    """Inverse of pad_plane + extract_patches: rebuilds the original-size plane."""
    expected = {
        (r * PATCH_SIDE, c * PATCH_SIDE)
        for r in range(layout.patches_per_col)
        for c in range(layout.patches_per_row)
    }
    seen = set()
    canvas = np.zeros((layout.padded_height, layout.padded_width), dtype=np.uint8)
    for patch in patches:
        origin = (patch.origin_row, patch.origin_col)
        if origin not in expected:
            raise ContractViolation(f"patch origin {origin} outside layout")
        if origin in seen:
            raise ContractViolation(f"duplicate patch origin {origin}")
        seen.add(origin)
        canvas[origin[0]:origin[0] + PATCH_SIDE, origin[1]:origin[1] + PATCH_SIDE] = patch.samples
    if seen != expected:
        missing = sorted(expected - seen)[:3]
        raise ContractViolation(f"missing patch origins, first few: {missing}")
    trimmed = canvas[:layout.plane_height, :layout.plane_width]
    return FramePlane(layout.plane_width, layout.plane_height, np.ascontiguousarray(trimmed))
