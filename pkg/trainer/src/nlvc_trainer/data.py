"""Synthetic token sources and a minimal Y4M patch loader.

Intra tokens are 2 * pixel (even values 0..510); temporal tokens are
(current - previous) + 255. These formulas are the codec's tokenization
contract and must not drift.

Constant-frame batches draw each sequence's gray level from a small fixed
palette: the value is recoverable from any revealed position, so the task
isolates whether the model learns to copy from context, while the
unconditional entropy (log 4 nats = 2 bits) stays far above the training
target. Four levels keep the task learnable within the standard 2000-step
budget at the default learning rate on weak CPUs.
"""

from __future__ import annotations

import numpy as np
import torch

SEQ_LEN = 1024
PALETTE = np.array([32, 96, 160, 224], dtype=np.int64)


def constant_intra_batch(batch: int, rng: np.random.Generator) -> torch.Tensor:
    """(B, 1024) intra tokens of constant patches."""
    values = rng.choice(PALETTE, size=batch)
    tokens = np.repeat(values[:, None] * 2, SEQ_LEN, axis=1)
    return torch.from_numpy(tokens)


def constant_temporal_batch(batch: int, rng: np.random.Generator,
                            flips: int = 8) -> tuple[torch.Tensor, torch.Tensor]:
    """(tokens, reference) for near-static temporal patches.

    The previous frame is a constant patch; the current frame differs in a
    few positions by small deltas, so temporal tokens concentrate at 255.
    """
    values = rng.choice(PALETTE, size=batch)
    ref_pixels = np.repeat(values[:, None], SEQ_LEN, axis=1)
    diff = np.zeros((batch, SEQ_LEN), dtype=np.int64)
    for i in range(batch):
        where = rng.choice(SEQ_LEN, size=flips, replace=False)
        diff[i, where] = rng.integers(-12, 13, size=flips)
    tokens = diff + 255
    reference = ref_pixels * 2
    return torch.from_numpy(tokens), torch.from_numpy(reference)


def patches_from_y4m(path, max_patches: int | None = None) -> torch.Tensor:
    """Intra tokens of every 32x32 patch of every plane of a Y4M clip.

    Stand-alone reader for the Y4M external format (signature line, FRAME
    markers, planar 4:2:0 payload); planes are edge-padded to multiples
    of 32 like the codec does.
    """
    with open(path, "rb") as f:
        header = f.readline()
        if not header.startswith(b"YUV4MPEG2"):
            raise ValueError(f"{path} is not a Y4M file")
        width = height = None
        chroma = "420"
        for tag in header.decode("ascii").strip().split(" ")[1:]:
            if tag.startswith("W"):
                width = int(tag[1:])
            elif tag.startswith("H"):
                height = int(tag[1:])
            elif tag.startswith("C"):
                chroma = tag[1:]
        if width is None or height is None:
            raise ValueError("Y4M header missing dimensions")
        if not (chroma.startswith("420") or chroma == "mono"):
            raise ValueError(f"unsupported chroma C{chroma}")
        plane_shapes = [(height, width)]
        if chroma != "mono":
            plane_shapes += [((height + 1) // 2, (width + 1) // 2)] * 2

        grids = []
        while True:
            marker = f.readline()
            if not marker:
                break
            if not marker.startswith(b"FRAME"):
                raise ValueError("expected FRAME marker")
            for (h, w) in plane_shapes:
                raw = f.read(h * w)
                if len(raw) != h * w:
                    raise ValueError("truncated frame payload")
                plane = np.frombuffer(raw, dtype=np.uint8).reshape(h, w)
                ph, pw = -(-h // 32) * 32, -(-w // 32) * 32
                padded = np.pad(plane, ((0, ph - h), (0, pw - w)), mode="edge")
                for r in range(0, ph, 32):
                    for c in range(0, pw, 32):
                        grids.append(padded[r:r + 32, c:c + 32].astype(np.int64) * 2)
            if max_patches is not None and len(grids) >= max_patches:
                break
    if not grids:
        raise ValueError(f"{path} contains no frames")
    if max_patches is not None:
        grids = grids[:max_patches]
    return torch.from_numpy(np.stack(grids).reshape(len(grids), SEQ_LEN))
