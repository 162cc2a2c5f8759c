"""AdamW training loop over masked constant/temporal patch batches."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from .data import constant_intra_batch, constant_temporal_batch, patches_from_y4m
from .masking import masked_loss, mean_masked_ce, sample_masked_batch
from .model import MaskedTokenModel, ModelConfig, TINY_CONFIG

DATA_SYNTHETIC_IFRAME = "synthetic_iframe"
DATA_SYNTHETIC_PFRAME = "synthetic_pframe"
DATA_USER_Y4M = "user_y4m"


@dataclass
class TrainConfig:
    model: ModelConfig = TINY_CONFIG
    steps: int = 2000
    batch: int = 8
    lr: float = 1e-4
    weight_decay: float = 0.01
    t_floor: float = 1e-3
    data_source: str = DATA_SYNTHETIC_IFRAME
    y4m_path: str | None = None
    seed: int = 0
    eval_every: int = 200
    eval_batches: int = 4

    def __post_init__(self):
        if self.t_floor <= 0:
            raise ValueError("t_floor must be positive")
        if self.data_source == DATA_USER_Y4M and not self.y4m_path:
            raise ValueError("user_y4m data source needs y4m_path")
        if self.data_source == DATA_SYNTHETIC_PFRAME and not self.model.has_reference_embedding:
            raise ValueError("temporal training expects a reference-carrying model")


@dataclass
class TrainResult:
    model: MaskedTokenModel
    initial_eval_ce: float
    final_eval_ce: float
    history: list[tuple[int, float]] = field(default_factory=list)


class _BatchSource:
    def __init__(self, config: TrainConfig, rng: np.random.Generator):
        self.config = config
        self.rng = rng
        self._pool = None
        if config.data_source == DATA_USER_Y4M:
            self._pool = patches_from_y4m(config.y4m_path)

    def next(self, batch: int):
        c = self.config
        if c.data_source == DATA_SYNTHETIC_IFRAME:
            return constant_intra_batch(batch, self.rng), None
        if c.data_source == DATA_SYNTHETIC_PFRAME:
            return constant_temporal_batch(batch, self.rng)
        idx = self.rng.integers(0, len(self._pool), size=batch)
        return self._pool[idx], None


def _evaluate(model: MaskedTokenModel, config: TrainConfig) -> float:
    """Mean cross-entropy per masked token on a pinned held-out stream."""
    rng = np.random.default_rng(config.seed + 777_777)
    gen = torch.Generator().manual_seed(config.seed + 777_777)
    source = _BatchSource(config, rng)
    model.eval()
    total, count = 0.0, 0
    with torch.no_grad():
        for _ in range(config.eval_batches):
            tokens, reference = source.next(config.batch)
            masked, targets, mask, _ = sample_masked_batch(tokens, config.t_floor, gen)
            logits = model(masked, reference)
            n = int(mask.sum())
            total += float(mean_masked_ce(logits, targets, mask)) * n
            count += n
    model.train()
    return total / max(count, 1)


def train(config: TrainConfig,
          warm_start: MaskedTokenModel | None = None,
          log=None) -> TrainResult:
    """Run the loop; returns the model plus held-out loss before and after.

    `warm_start` copies all shared tensors from an already trained model
    (an intra model, typically) and leaves the reference table at its fresh
    initialization.
    """
    torch.manual_seed(config.seed)
    model = MaskedTokenModel(config.model)
    if warm_start is not None:
        model.warm_start_from(warm_start)

    rng = np.random.default_rng(config.seed)
    gen = torch.Generator().manual_seed(config.seed + 1)
    source = _BatchSource(config, rng)
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.lr,
                                  weight_decay=config.weight_decay)

    initial = _evaluate(model, config)
    history = [(0, initial)]
    if log:
        log(f"step 0: held-out ce/masked-token {initial:.4f} nats")

    for step in range(1, config.steps + 1):
        tokens, reference = source.next(config.batch)
        masked, targets, mask, t = sample_masked_batch(tokens, config.t_floor, gen)
        logits = model(masked, reference)
        loss = masked_loss(logits, targets, mask, t)
        if not torch.isfinite(loss):
            raise RuntimeError(
                f"training diverged at step {step}: loss={float(loss.detach())}, "
                f"masked={int(mask.sum())}, t min={float(t.min()):.4g}"
            )
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        if step % config.eval_every == 0 or step == config.steps:
            ce = _evaluate(model, config)
            history.append((step, ce))
            if log:
                log(f"step {step}: held-out ce/masked-token {ce:.4f} nats")

    return TrainResult(model=model, initial_eval_ce=initial,
                       final_eval_ce=history[-1][1], history=history)
