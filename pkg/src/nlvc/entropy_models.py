"""Probability models driving the range coder, plus CDF quantization.

Three model families share one contract: given the partially revealed token
grid for a patch, produce one quantized CDF per position of the current
group. Every CDF gives all 511 codeable symbols a frequency of at least 1
(total exactly 65536), so any token sequence stays decodable no matter how
confident the model is.

  * uniform   - flat distribution, the floor for rate comparisons
  * adaptive  - order-0 Laplace-smoothed histogram, updated after each
                coded group from decoded symbols only, so encoder and
                decoder stay symmetric by construction
  * transformer - the learned bidirectional model from transformer_core
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ContractViolation
from .group_schedule import GroupSchedule, mask_pattern
from .range_coder import CDF_TOTAL
from .tokenizer import (
    CODING_ALPHABET,
    KIND_IFRAME,
    KIND_PFRAME,
    KIND_REFERENCE,
    MASK_ID,
    TokenGrid,
)
from . import transformer_core

MODEL_UNIFORM = 0
MODEL_ADAPTIVE = 1
MODEL_TRANSFORMER = 2

_HALVING_THRESHOLD = 1 << 16


@dataclass(frozen=True)
class QuantizedCdf:
    """Integer CDF over the 511-symbol alphabet. cum has length 512."""

    cum: np.ndarray

    def __post_init__(self):
        if self.cum.shape != (CODING_ALPHABET + 1,):
            raise ContractViolation(f"cum must have length {CODING_ALPHABET + 1}")

    def freq(self, symbol: int) -> int:
        return int(self.cum[symbol + 1]) - int(self.cum[symbol])

    def validate(self) -> None:
        if int(self.cum[0]) != 0 or int(self.cum[-1]) != CDF_TOTAL:
            raise ContractViolation("cum must start at 0 and end at 65536")
        if np.any(np.diff(self.cum) < 1):
            raise ContractViolation("every symbol needs frequency >= 1")


@dataclass(frozen=True)
class ModelContext:
    """Everything a model may condition on at one decoding step."""

    tokens: TokenGrid
    reference: Optional[TokenGrid]
    step: int
    schedule: GroupSchedule

    def validate(self) -> None:
        masked = mask_pattern(self.schedule, self.step)
        actual = self.tokens.tokens == MASK_ID
        if not np.array_equal(masked, actual):
            raise ContractViolation("mask tokens do not match the schedule's pattern")
        if self.tokens.kind == KIND_PFRAME and self.reference is None:
            raise ContractViolation("temporal grids require a reference grid")
        if self.reference is not None:
            if self.reference.kind != KIND_REFERENCE:
                raise ContractViolation("reference grid must have kind 'reference'")
            if np.any(self.reference.tokens == MASK_ID):
                raise ContractViolation("reference grid must be fully revealed")


def quantize_cdf(probabilities: np.ndarray) -> QuantizedCdf:
    """Map 511 probabilities to integer frequencies totalling 65536.

    Frequencies start at max(1, floor(p * 65536)); the surplus or deficit is
    then absorbed by the single largest-probability symbol (ties broken by
    lowest index). The adjusted symbol provably stays >= 1, so the result is
    always decodable.
    """
    p = np.asarray(probabilities, dtype=np.float64)
    if p.shape != (CODING_ALPHABET,):
        raise ContractViolation(f"need {CODING_ALPHABET} probabilities, got {p.shape}")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ContractViolation("probabilities must be finite and non-negative")
    total = p.sum()
    if total <= 0:
        raise ContractViolation("probabilities sum to zero")
    p = p / total

    freq = np.maximum(1, np.floor(p * CDF_TOTAL)).astype(np.int64)
    freq[int(np.argmax(p))] += CDF_TOTAL - int(freq.sum())
    cum = np.zeros(CODING_ALPHABET + 1, dtype=np.int64)
    np.cumsum(freq, out=cum[1:])
    return QuantizedCdf(cum)


def quantize_cum_rows(prob_rows: np.ndarray) -> np.ndarray:
    """Vectorized quantizer: (n, 511) probability rows -> (n, 512) cum rows.

    Row-for-row identical to quantize_cdf.
    """
    p = np.asarray(prob_rows, dtype=np.float64)
    p = p / p.sum(axis=1, keepdims=True)
    freq = np.maximum(1, np.floor(p * CDF_TOTAL)).astype(np.int64)
    adjust = CDF_TOTAL - freq.sum(axis=1)
    freq[np.arange(len(p)), np.argmax(p, axis=1)] += adjust
    cum = np.zeros((len(p), CODING_ALPHABET + 1), dtype=np.int64)
    np.cumsum(freq, axis=1, out=cum[:, 1:])
    return cum


def cum_rows_from_logits(logits: np.ndarray) -> np.ndarray:
    """(B, n, vocab) logits -> (B, n, 512) quantized cum rows.

    Drops the mask logit, exponentiates stably in float64 and hands the
    unnormalized weights to the quantizer (which renormalizes). This is the
    one conversion path shared by every transformer prediction.
    """
    z = np.asarray(logits, dtype=np.float64)[..., :CODING_ALPHABET]
    z -= z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    lead = e.shape[:-1]
    return quantize_cum_rows(e.reshape(-1, CODING_ALPHABET)).reshape(*lead, CODING_ALPHABET + 1)


_UNIFORM_CUM = quantize_cdf(np.full(CODING_ALPHABET, 1.0 / CODING_ALPHABET)).cum


class _UniformSession:
    def __init__(self, n_patches: int):
        self._n = n_patches

    def predict(self, work: np.ndarray, positions: np.ndarray) -> np.ndarray:
        return np.broadcast_to(_UNIFORM_CUM, (self._n, len(positions), CODING_ALPHABET + 1))

    def reveal(self, work: np.ndarray, positions: np.ndarray) -> None:
        pass


class UniformModel:
    """Flat distribution over the coding alphabet. Stateless."""

    model_kind = MODEL_UNIFORM
    stateless = True

    def clone_for_patch(self) -> "UniformModel":
        return self

    def current_cum(self, kind: str) -> np.ndarray:
        return _UNIFORM_CUM

    def plane_session(self, init_tokens: np.ndarray, reference, kind: str) -> _UniformSession:
        return _UniformSession(len(init_tokens))

    def predict_group(self, ctx: ModelContext) -> list[tuple[tuple[int, int], QuantizedCdf]]:
        cdf = QuantizedCdf(_UNIFORM_CUM)
        return [(pos, cdf) for pos in ctx.schedule.positions(ctx.step)]

    def update(self, position, symbol: int) -> None:
        pass


class AdaptiveModel:
    """Order-0 adaptive histogram with Laplace smoothing.

    Keeps separate histograms for intra and temporal grids. Counts only ever
    change through update(), which the codec calls after a group has been
    coded, using decoded symbols, so a decoder replaying the same symbols
    reproduces the encoder's CDFs exactly. When any count reaches 2**16 the
    whole histogram is halved to bound totals.
    """

    model_kind = MODEL_ADAPTIVE
    stateless = False

    def __init__(self):
        self._counts = {
            KIND_IFRAME: np.zeros(CODING_ALPHABET, dtype=np.int64),
            KIND_PFRAME: np.zeros(CODING_ALPHABET, dtype=np.int64),
        }
        self._cached_cum: dict[str, Optional[np.ndarray]] = {KIND_IFRAME: None, KIND_PFRAME: None}
        self._last_kind = KIND_IFRAME

    def clone_for_patch(self) -> "AdaptiveModel":
        return AdaptiveModel()

    def probabilities(self, kind: str) -> np.ndarray:
        counts = self._counts[kind]
        return (counts + 1) / (counts.sum() + CODING_ALPHABET)

    def current_cum(self, kind: str) -> np.ndarray:
        self._last_kind = kind
        cached = self._cached_cum[kind]
        if cached is None:
            cached = quantize_cdf(self.probabilities(kind)).cum
            self._cached_cum[kind] = cached
        return cached

    def predict_group(self, ctx: ModelContext) -> list[tuple[tuple[int, int], QuantizedCdf]]:
        kind = ctx.tokens.kind
        if kind == KIND_REFERENCE:
            raise ContractViolation("reference grids are context, never coded")
        cdf = QuantizedCdf(self.current_cum(kind))
        return [(pos, cdf) for pos in ctx.schedule.positions(ctx.step)]

    def update(self, position, symbol: int, kind: Optional[str] = None) -> None:
        """Count one observed symbol (position is kept for interface parity)."""
        if not 0 <= symbol <= CODING_ALPHABET - 1:
            raise ContractViolation(f"symbol {symbol} outside [0, 510]")
        k = kind if kind is not None else self._last_kind
        counts = self._counts[k]
        counts[symbol] += 1
        if counts[symbol] >= _HALVING_THRESHOLD:
            counts //= 2
        self._cached_cum[k] = None


class _TransformerSession:
    def __init__(self, session: transformer_core.ForwardSession):
        self._session = session

    def predict(self, work: np.ndarray, positions: np.ndarray) -> np.ndarray:
        return cum_rows_from_logits(self._session.predict(work, positions))

    def reveal(self, work: np.ndarray, positions: np.ndarray) -> None:
        self._session.reveal(work, positions)


class TransformerModel:
    """Learned bidirectional entropy model.

    Immutable after construction; safe to share across patches. The
    reference term is used only for grids that carry a reference, so one
    weight file can code both intra and temporal grids.
    """

    model_kind = MODEL_TRANSFORMER
    stateless = True

    def __init__(self, weights: transformer_core.ModelWeights):
        self.weights = weights
        self.config = weights.config
        self.content_hash = weights.content_hash

    def clone_for_patch(self) -> "TransformerModel":
        return self

    def plane_session(self, init_tokens: np.ndarray, reference: Optional[np.ndarray],
                      kind: str) -> _TransformerSession:
        """Prediction session for one batch of sequences coded in lockstep."""
        if kind == KIND_PFRAME and self.config.has_reference_embedding and reference is None:
            raise ContractViolation("model expects a reference grid for temporal patches")
        ref = reference if self.config.has_reference_embedding else None
        return _TransformerSession(
            transformer_core.make_session(self.weights, init_tokens, ref))

    def predict_group(self, ctx: ModelContext) -> list[tuple[tuple[int, int], QuantizedCdf]]:
        positions = ctx.schedule.flat_groups[ctx.step]
        tokens = ctx.tokens.flat.reshape(1, -1)
        ref = None if ctx.reference is None else ctx.reference.flat.reshape(1, -1)
        session = self.plane_session(tokens, ref, ctx.tokens.kind)
        rows = session.predict(tokens, positions)[0]
        return [
            (pos, QuantizedCdf(rows[i]))
            for i, pos in enumerate(ctx.schedule.positions(ctx.step))
        ]

    def update(self, position, symbol: int) -> None:
        pass


def predict_group(model, ctx: ModelContext) -> list[tuple[tuple[int, int], QuantizedCdf]]:
    """One (position, cdf) pair per position of group ctx.step, in order."""
    return model.predict_group(ctx)


def adaptive_update(model: AdaptiveModel, position, symbol: int) -> None:
    model.update(position, symbol)


def model_for_kind(kind_id: int, weights: Optional[transformer_core.ModelWeights] = None):
    if kind_id == MODEL_UNIFORM:
        return UniformModel()
    if kind_id == MODEL_ADAPTIVE:
        return AdaptiveModel()
    if kind_id == MODEL_TRANSFORMER:
        if weights is None:
            raise ContractViolation("transformer model requires weights")
        return TransformerModel(weights)
    raise ContractViolation(f"unknown model kind {kind_id}")
