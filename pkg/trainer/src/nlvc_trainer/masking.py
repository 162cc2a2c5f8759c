"""Masking-ratio sampling and the training objective.

Per sequence a ratio t is drawn uniformly from [t_floor, 1], then every
position is masked independently with probability t. The loss is the
cross-entropy summed over masked positions, weighted by 1/t per sequence
and averaged over the batch; the 1/t weight makes every masking level
contribute equally in expectation. The clamp at t_floor bounds the weight
(and gradient variance), which the raw formulation leaves unbounded.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F

from .model import MASK_ID


def sample_masked_batch(tokens: torch.Tensor, t_floor: float,
                        generator: torch.Generator | None = None):
    """(B, S) clean tokens -> (masked input, targets, mask bool, t per sequence)."""
    if not 0.0 < t_floor <= 1.0:
        raise ValueError("t_floor must be in (0, 1]")
    B, S = tokens.shape
    t = t_floor + (1.0 - t_floor) * torch.rand(B, generator=generator)
    mask = torch.rand(B, S, generator=generator) < t.unsqueeze(1)
    masked = tokens.masked_fill(mask, MASK_ID)
    return masked, tokens, mask, t


def masked_loss(logits: torch.Tensor, targets: torch.Tensor,
                mask: torch.Tensor, t: torch.Tensor) -> torch.Tensor:
    """Mean over the batch of (1/t) * sum of masked-position cross-entropies."""
    ce = F.cross_entropy(logits.reshape(-1, logits.shape[-1]),
                         targets.reshape(-1), reduction="none")
    ce = ce.view(targets.shape)
    per_seq = (ce * mask).sum(dim=1) / t
    return per_seq.mean()


def mean_masked_ce(logits: torch.Tensor, targets: torch.Tensor,
                   mask: torch.Tensor) -> torch.Tensor:
    """Unweighted cross-entropy per masked token, the monitoring metric.

    A fresh model scores ln(vocab) = ln 512 here regardless of the 1/t
    training weight, which makes it the right sanity and progress gauge.
    """
    ce = F.cross_entropy(logits.reshape(-1, logits.shape[-1]),
                         targets.reshape(-1), reduction="none")
    ce = ce.view(targets.shape)
    denom = mask.sum().clamp(min=1)
    return (ce * mask).sum() / denom
