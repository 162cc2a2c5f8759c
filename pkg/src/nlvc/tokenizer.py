"""Bijective pixel <-> token mappings.

Intra grids double the pixel value (even tokens 0..510); temporal grids
shift the frame difference by 255 (full range 0..510). Both are exactly
invertible, which is what makes the codec lossless. Token 511 is reserved
for the mask and never reaches the coded bitstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, CorruptGridError
from .tiling import PATCH_SIDE, Patch

VOCAB_SIZE = 512
MASK_ID = 511
CODING_ALPHABET = 511  # tokens 0..510 are codeable; the mask is not

KIND_IFRAME = "iframe"
KIND_PFRAME = "pframe"
KIND_REFERENCE = "reference"


@dataclass(frozen=True)
class Vocabulary:
    size: int = VOCAB_SIZE
    mask_id: int = MASK_ID
    coding_alphabet_size: int = CODING_ALPHABET


VOCABULARY = Vocabulary()


@dataclass(frozen=True)
class TokenGrid:
    """32x32 token IDs plus the tokenization kind they came from."""

    tokens: np.ndarray
    kind: str

    def __post_init__(self):
        if self.tokens.shape != (PATCH_SIDE, PATCH_SIDE):
            raise ContractViolation(f"token grid must be {PATCH_SIDE}x{PATCH_SIDE}")
        if self.kind not in (KIND_IFRAME, KIND_PFRAME, KIND_REFERENCE):
            raise ContractViolation(f"unknown grid kind {self.kind!r}")

    @property
    def flat(self) -> np.ndarray:
        return self.tokens.reshape(-1)


def tokenize_i(patch: Patch) -> TokenGrid:
    """Pixel x -> token 2x."""
    return TokenGrid(patch.samples.astype(np.int16) * 2, KIND_IFRAME)


def detokenize_i(grid: TokenGrid) -> Patch:
    """Token t -> pixel t/2; rejects odd or mask tokens."""
    if grid.kind != KIND_IFRAME:
        raise ContractViolation(f"expected an iframe grid, got {grid.kind}")
    t = grid.tokens
    if np.any(t == MASK_ID):
        raise CorruptGridError("mask token present in a finalized intra grid")
    if np.any(t % 2) or t.min() < 0 or t.max() > 510:
        raise CorruptGridError("intra grid holds a non-even or out-of-range token")
    return Patch(0, 0, (t // 2).astype(np.uint8))


def tokenize_p(current: Patch, reference: Patch) -> TokenGrid:
    """Token = (x_t - x_ref) + 255, mapping differences [-255, 255] to [0, 510]."""
    if (current.origin_row, current.origin_col) != (reference.origin_row, reference.origin_col):
        raise ContractViolation("current and reference patches must be co-located")
    diff = current.samples.astype(np.int16) - reference.samples.astype(np.int16)
    return TokenGrid(diff + 255, KIND_PFRAME)


def detokenize_p(grid: TokenGrid, reference: Patch) -> Patch:
    """Exact inverse of tokenize_p given the reconstructed reference patch."""
    if grid.kind != KIND_PFRAME:
        raise ContractViolation(f"expected a pframe grid, got {grid.kind}")
    t = grid.tokens
    if np.any(t == MASK_ID):
        raise CorruptGridError("mask token present in a finalized temporal grid")
    if t.min() < 0 or t.max() > 510:
        raise CorruptGridError("temporal grid token outside [0, 510]")
    values = t.astype(np.int16) - 255 + reference.samples.astype(np.int16)
    if values.min() < 0 or values.max() > 255:
        # A valid encode can never produce this; the stream is corrupt.
        bad = np.argwhere((values < 0) | (values > 255))[0]
        raise CorruptGridError(
            f"reconstructed sample {int(values[tuple(bad)])} at {tuple(bad)} "
            "is outside [0, 255]"
        )
    return Patch(reference.origin_row, reference.origin_col, values.astype(np.uint8))


def reference_tokens(reference: Patch) -> TokenGrid:
    """Intra-tokenized previous-frame patch used as conditioning context."""
    return TokenGrid(reference.samples.astype(np.int16) * 2, KIND_REFERENCE)
