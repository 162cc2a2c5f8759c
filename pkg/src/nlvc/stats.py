"""Entropy estimation and diagnostic CSV reporting.

An order-0 entropy estimate over token histograms stands in for external
baseline codecs at desk scale: it answers "how compressible are these
tokens to a memoryless coder" and makes the intra/temporal comparison
quantitative without any learned model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .codec import RateReport
from .errors import ContractViolation
from .tokenizer import CODING_ALPHABET, MASK_ID, TokenGrid


@dataclass(frozen=True)
class EntropyEstimate:
    bits_per_token: float
    token_kind: str
    source: str = ""

    @property
    def rate_percent(self) -> float:
        """Token entropy as a share of the 8 raw bits each sample costs."""
        return self.bits_per_token / 8.0 * 100.0


def order0_entropy(grids: Sequence[TokenGrid], source: str = "") -> EntropyEstimate:
    """Empirical Shannon entropy of the pooled token histogram."""
    if not grids:
        raise ContractViolation("need at least one grid")
    kind = grids[0].kind
    counts = np.zeros(CODING_ALPHABET, dtype=np.int64)
    for g in grids:
        if g.kind != kind:
            raise ContractViolation("all grids must share one tokenization kind")
        if np.any(g.tokens == MASK_ID):
            raise ContractViolation("grids must be fully revealed")
        counts += np.bincount(g.flat, minlength=CODING_ALPHABET)
    p = counts[counts > 0] / counts.sum()
    bits = float(-(p * np.log2(p)).sum())
    return EntropyEstimate(bits_per_token=bits, token_kind=kind, source=source)


def entropy_of_histogram(counts: Iterable[float]) -> float:
    """Plain -sum(p log2 p); the reference the estimator is tested against."""
    counts = [c for c in counts if c > 0]
    total = sum(counts)
    return -sum((c / total) * math.log2(c / total) for c in counts)


def per_frame_rate_series(report: RateReport) -> list[tuple[int, float]]:
    """(frame index, payload rate %) rows, one per frame."""
    return [
        (f, report.frame_rate_percent(f))
        for f in range(report.header.frame_count)
    ]


def rate_series_csv(report: RateReport) -> str:
    lines = ["frame,rate_percent"]
    for f, rate in per_frame_rate_series(report):
        lines.append(f"{f},{rate:.6f}")
    return "\n".join(lines) + "\n"


def entropy_csv(estimates: Sequence[EntropyEstimate]) -> str:
    lines = ["source,token_kind,bits_per_token,rate_percent"]
    for e in estimates:
        lines.append(f"{e.source},{e.token_kind},{e.bits_per_token:.6f},{e.rate_percent:.6f}")
    return "\n".join(lines) + "\n"
