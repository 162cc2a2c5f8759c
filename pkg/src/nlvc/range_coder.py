"""Byte-oriented range coder with carry propagation.

32-bit range, 16-bit frequency precision (every CDF totals 65536, so the
range/total division is a shift). Carries are handled the classic way: one
cached byte plus a run of pending 0xFF bytes that resolve once the carry
is known; the canonical leading filler byte is suppressed because the
decoder never reads it. Fixed cost is the four-byte flush, and the
range/total rounding loses at most ~0.006 bits per symbol, so a stream
never exceeds its ideal code length by more than 64 bits for any
realistic length.

Streams are not self-terminating: the caller keeps the symbol count (the
container stores per-patch lengths anyway).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import ContractViolation, CorruptStreamError

_TOP = 1 << 24
_MASK32 = 0xFFFFFFFF
_TOTAL_BITS = 16
CDF_TOTAL = 1 << _TOTAL_BITS


@dataclass(frozen=True)
class CodedStream:
    data: bytes
    symbol_count: int


class RangeEncoder:
    """Incremental encoder. Feed (cum_lo, cum_hi) spans, then call finish()."""

    __slots__ = ("_low", "_range", "_cache", "_pending", "_out", "_started")

    def __init__(self):
        self._low = 0
        self._range = _MASK32
        self._cache = 0
        self._pending = 0
        self._out = bytearray()
        self._started = False

    def encode_span(self, cum_lo: int, cum_hi: int) -> None:
        """Encode one symbol occupying [cum_lo, cum_hi) of the 65536 grid."""
        if cum_hi <= cum_lo:
            raise ContractViolation("symbol has zero frequency")
        r = self._range >> _TOTAL_BITS
        self._low += cum_lo * r
        self._range = (cum_hi - cum_lo) * r
        while self._range < _TOP:
            self._shift_low()
            self._range = (self._range << 8) & _MASK32

    def encode(self, cum: np.ndarray, symbol: int) -> None:
        self.encode_span(int(cum[symbol]), int(cum[symbol + 1]))

    def _shift_low(self) -> None:
        low = self._low
        if low < 0xFF000000 or low > _MASK32:
            carry = low >> 32
            if self._started:
                self._out.append((self._cache + carry) & 0xFF)
            self._started = True
            if self._pending:
                fill = (0xFF + carry) & 0xFF
                self._out.extend([fill] * self._pending)
                self._pending = 0
            self._cache = (low >> 24) & 0xFF
        else:
            self._pending += 1
        self._low = (low << 8) & _MASK32

    def finish(self) -> bytes:
        for _ in range(5):
            self._shift_low()
        return bytes(self._out)


class RangeDecoder:
    """Mirror of RangeEncoder; pulls one symbol per supplied CDF."""

    __slots__ = ("_data", "_pos", "_range", "_code")

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0
        self._range = _MASK32
        code = 0
        for _ in range(4):
            code = (code << 8) | self._next_byte()
        self._code = code

    def _next_byte(self) -> int:
        if self._pos >= len(self._data):
            raise CorruptStreamError(
                f"coded stream exhausted after {len(self._data)} bytes"
            )
        b = self._data[self._pos]
        self._pos += 1
        return b

    def decode(self, cum: np.ndarray) -> int:
        """Decode the next symbol under `cum` (length 512, cum[-1] = 65536)."""
        r = self._range >> _TOTAL_BITS
        value = self._code // r
        if value >= CDF_TOTAL:
            value = CDF_TOTAL - 1
        symbol = int(np.searchsorted(cum, value, side="right")) - 1
        lo = int(cum[symbol])
        self._code -= lo * r
        self._range = (int(cum[symbol + 1]) - lo) * r
        while self._range < _TOP:
            self._code = ((self._code << 8) | self._next_byte()) & _MASK32
            self._range = (self._range << 8) & _MASK32
        return symbol

    @property
    def bytes_consumed(self) -> int:
        return self._pos


def encode_stream(symbols: Sequence[int], cdfs: Sequence[np.ndarray]) -> CodedStream:
    """Encode a whole symbol sequence with per-symbol CDFs (cum arrays)."""
    if len(symbols) != len(cdfs):
        raise ContractViolation("symbols and cdfs must have the same length")
    enc = RangeEncoder()
    for s, cum in zip(symbols, cdfs):
        enc.encode(cum, int(s))
    return CodedStream(enc.finish(), len(symbols))


def decode_stream(stream: CodedStream,
                  cdf_provider: Iterator[np.ndarray] | Callable[[], np.ndarray]) -> list[int]:
    """Decode symbol_count symbols, pulling one CDF per symbol.

    `cdf_provider` is an iterator (or zero-argument callable) producing the
    same cum arrays, in the same order, that the encoder used.
    """
    dec = RangeDecoder(stream.data)
    pull = cdf_provider if callable(cdf_provider) else iter(cdf_provider).__next__
    return [dec.decode(pull()) for _ in range(stream.symbol_count)]


def ideal_bits(cdfs: Sequence[np.ndarray], symbols: Sequence[int]) -> float:
    """Information content of the sequence under its coding distributions."""
    total = 0.0
    for cum, s in zip(cdfs, symbols):
        freq = int(cum[s + 1]) - int(cum[s])
        total += -np.log2(freq / CDF_TOTAL)
    return total
