import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlvc.entropy_models import quantize_cdf
from nlvc.errors import ContractViolation, CorruptStreamError
from nlvc.range_coder import (
    CodedStream,
    RangeDecoder,
    decode_stream,
    encode_stream,
    ideal_bits,
)


def cum_from_weights(weights):
    w = np.asarray(weights, dtype=np.float64)
    return quantize_cdf(w / w.sum()).cum


UNIFORM_CUM = cum_from_weights(np.ones(511))


def random_case(seed, max_len=400):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(0, max_len))
    shape = rng.choice(["flat", "spiky", "geometric"])
    if shape == "flat":
        w = np.ones(511)
    elif shape == "spiky":
        w = rng.random(511) ** 8 + 1e-9
    else:
        w = 0.98 ** np.arange(511)
    cum = cum_from_weights(w)
    freq = np.diff(cum)
    symbols = rng.choice(511, size=n, p=freq / freq.sum())
    return [int(s) for s in symbols], [cum] * n


def test_empty_stream_is_tiny():
    stream = encode_stream([], [])
    assert len(stream.data) <= 8
    assert decode_stream(stream, iter([])) == []


def test_single_symbol_round_trip():
    stream = encode_stream([42], [UNIFORM_CUM])
    assert decode_stream(stream, iter([UNIFORM_CUM])) == [42]


def test_point_mass_costs_almost_nothing():
    # freq 65026 on symbol 7 -> -log2(65026/65536) = 0.0113 bits/symbol
    p = np.full(511, 0.0)
    p[7] = 1.0
    cum = quantize_cdf(p).cum
    assert cum[8] - cum[7] == 65536 - 510
    symbols = [7] * 1000
    stream = encode_stream(symbols, [cum] * 1000)
    assert len(stream.data) * 8 <= 1000 * 0.0113 + 64
    assert len(stream.data) <= 10
    assert decode_stream(stream, iter([cum] * 1000)) == symbols


def test_uniform_4096_rate_window():
    rng = np.random.default_rng(0)
    symbols = [int(s) for s in rng.integers(0, 511, size=4096)]
    stream = encode_stream(symbols, [UNIFORM_CUM] * 4096)
    bits_per_symbol = len(stream.data) * 8 / 4096
    assert 8.99 <= bits_per_symbol <= 9.02
    assert decode_stream(stream, iter([UNIFORM_CUM] * 4096)) == symbols


@pytest.mark.parametrize("seed", range(40))
def test_round_trip_and_bound_randomized(seed):
    symbols, cdfs = random_case(seed)
    stream = encode_stream(symbols, cdfs)
    assert stream.symbol_count == len(symbols)
    assert len(stream.data) * 8 <= ideal_bits(cdfs, symbols) + 64
    assert decode_stream(stream, iter(cdfs)) == symbols


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_round_trip_property(seed):
    symbols, cdfs = random_case(seed, max_len=120)
    stream = encode_stream(symbols, cdfs)
    assert decode_stream(stream, iter(cdfs)) == symbols
    assert len(stream.data) * 8 <= ideal_bits(cdfs, symbols) + 64


def test_determinism():
    symbols, cdfs = random_case(123)
    a = encode_stream(symbols, cdfs)
    b = encode_stream(symbols, cdfs)
    assert a.data == b.data


def test_mismatched_lengths_rejected():
    with pytest.raises(ContractViolation):
        encode_stream([1, 2], [UNIFORM_CUM])


def test_zero_frequency_rejected():
    cum = UNIFORM_CUM.copy()
    cum[43] = cum[42]  # symbol 42 now has zero width
    with pytest.raises(ContractViolation):
        encode_stream([42], [cum])


def test_exhausted_stream_raises_corruption():
    symbols, cdfs = random_case(7, max_len=50)
    stream = encode_stream(symbols, cdfs)
    clipped = CodedStream(stream.data[:2], stream.symbol_count)
    with pytest.raises(CorruptStreamError):
        decode_stream(clipped, iter(cdfs))


@pytest.mark.parametrize("seed", range(12))
def test_wrong_cdfs_never_crash(seed):
    """Decoding with mismatched CDFs must stay contained: wrong symbols or a
    clean corruption error, never anything else."""
    symbols, cdfs = random_case(seed)
    if not symbols:
        return
    stream = encode_stream(symbols, cdfs)
    rng = np.random.default_rng(seed + 1)
    wrong = [cum_from_weights(rng.random(511) + 1e-9)] * len(symbols)
    try:
        out = decode_stream(stream, iter(wrong))
        assert len(out) == len(symbols)
        assert all(0 <= s <= 510 for s in out)
    except CorruptStreamError:
        pass


def test_decoder_consumes_exactly_the_stream():
    symbols, cdfs = random_case(99)
    stream = encode_stream(symbols, cdfs)
    dec = RangeDecoder(stream.data)
    for cum in cdfs:
        dec.decode(cum)
    assert dec.bytes_consumed == len(stream.data)
