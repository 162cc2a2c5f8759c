import numpy as np
import pytest

from nlvc import transformer_core
from nlvc.codec import (
    FRAME_TYPE_I,
    FRAME_TYPE_P,
    EncoderConfig,
    decode_patch,
    decode_video,
    encode_patch,
    encode_video,
    parse_header,
    rate_report,
)
from nlvc.entropy_models import (
    MODEL_ADAPTIVE,
    MODEL_TRANSFORMER,
    MODEL_UNIFORM,
    AdaptiveModel,
    TransformerModel,
    UniformModel,
)
from nlvc.errors import (
    CodecError,
    ContainerFormatError,
    ContractViolation,
    ModelHashMismatchError,
)
from nlvc.frame_io import FrameYUV420, VideoHeader
from nlvc.group_schedule import build_schedule
from nlvc.range_coder import CodedStream
from nlvc.synthetic import constant_video, gradient_video, moving_square_video
from nlvc.tiling import Patch
from nlvc.tokenizer import KIND_IFRAME, TokenGrid, reference_tokens

from conftest import frames_equal, make_frame, make_plane


def random_grid(rng, kind=KIND_IFRAME):
    if kind == KIND_IFRAME:
        tokens = rng.integers(0, 256, size=(32, 32)).astype(np.int16) * 2
    else:
        tokens = rng.integers(0, 511, size=(32, 32)).astype(np.int16)
    return TokenGrid(tokens, kind)


# ---------------------------------------------------------------------------
# Patch-level round trips.

def test_encode_patch_uniform_size_window():
    rng = np.random.default_rng(0)
    schedule = build_schedule(2, 32)
    stream = encode_patch(random_grid(rng), None, UniformModel(), schedule)
    bits = len(stream.data) * 8
    assert 1024 * 8.99 <= bits <= 1024 * 9.02 + 64


def test_constant_patch_adaptive_beats_uniform():
    schedule = build_schedule(2, 32)
    grid = TokenGrid(np.full((32, 32), 200, dtype=np.int16), KIND_IFRAME)
    uniform_size = len(encode_patch(grid, None, UniformModel(), schedule).data)
    adaptive_size = len(encode_patch(grid, None, AdaptiveModel(), schedule).data)
    assert adaptive_size < uniform_size


@pytest.mark.parametrize("delta", [0, 1, 2])
def test_patch_round_trip_all_models(delta, tiny_weights):
    rng = np.random.default_rng(delta)
    schedule = build_schedule(delta, 32)
    for model_factory in (UniformModel, AdaptiveModel,
                          lambda: TransformerModel(tiny_weights)):
        grid = random_grid(rng)
        out = decode_patch(encode_patch(grid, None, model_factory(), schedule),
                           None, model_factory(), schedule)
        assert np.array_equal(out.tokens, grid.tokens)

        pgrid = random_grid(rng, "pframe")
        ref_patch = Patch(0, 0, rng.integers(0, 256, size=(32, 32)).astype(np.uint8))
        ref = reference_tokens(ref_patch)
        out = decode_patch(encode_patch(pgrid, ref, model_factory(), schedule),
                           ref, model_factory(), schedule)
        assert np.array_equal(out.tokens, pgrid.tokens)


def test_adaptive_histograms_symmetric_after_patch():
    rng = np.random.default_rng(5)
    schedule = build_schedule(1, 32)
    grid = random_grid(rng)
    enc_model = AdaptiveModel()
    stream = encode_patch(grid, None, enc_model, schedule)
    dec_model = AdaptiveModel()
    decode_patch(stream, None, dec_model, schedule)
    assert np.array_equal(enc_model._counts["iframe"], dec_model._counts["iframe"])


def test_encode_patch_rejects_masked_grid():
    schedule = build_schedule(0, 32)
    tokens = np.full((32, 32), 511, dtype=np.int16)
    with pytest.raises(ContractViolation):
        encode_patch(TokenGrid(tokens, KIND_IFRAME), None, UniformModel(), schedule)


def test_patch_stream_tamper_is_contained():
    rng = np.random.default_rng(6)
    schedule = build_schedule(1, 32)
    grid = random_grid(rng)
    stream = encode_patch(grid, None, UniformModel(), schedule)
    for byte_idx in (0, 5, len(stream.data) // 2, len(stream.data) - 1):
        bad = bytearray(stream.data)
        bad[byte_idx] ^= 0x40
        try:
            out = decode_patch(CodedStream(bytes(bad), stream.symbol_count),
                               None, UniformModel(), schedule)
            # either way is acceptable; a silent wrong decode must differ
            assert out.tokens.shape == (32, 32)
        except CodecError:
            pass


# ---------------------------------------------------------------------------
# Video-level round trips.

def test_one_frame_video_is_single_intra():
    header, frames = gradient_video(64, 64, 1)
    data = encode_video(frames, EncoderConfig(model_kind=MODEL_UNIFORM))
    report = rate_report(data)
    assert {r.frame_type for r in report.rows} == {FRAME_TYPE_I}
    assert report.predicted_bits == 0
    assert report.intra_bits == report.total_payload_bits


def test_static_video_adaptive_p_cheaper_than_i():
    header, frames = gradient_video(64, 64, 2)
    data = encode_video(frames, EncoderConfig(model_kind=MODEL_ADAPTIVE))
    report = rate_report(data)
    assert report.frame_bits(1) < report.frame_bits(0)


@pytest.mark.parametrize("model_kind", [MODEL_UNIFORM, MODEL_ADAPTIVE])
def test_video_round_trip_random(model_kind):
    rng = np.random.default_rng(7)
    frames = [make_frame(64, 48, rng) for _ in range(3)]
    data = encode_video(frames, EncoderConfig(delta=1, model_kind=model_kind))
    _, out = decode_video(data)
    assert frames_equal(frames, out)


def test_video_round_trip_transformer_both_ref_modes(tiny_weights, tiny_weights_noref):
    header, frames = moving_square_video(64, 48, 3)
    for weights in (tiny_weights, tiny_weights_noref):
        config = EncoderConfig(delta=1, model_kind=MODEL_TRANSFORMER, weights=weights)
        data = encode_video(frames, config)
        _, out = decode_video(data, weights=weights)
        assert frames_equal(frames, out)


def test_gop_structure_and_frame_types():
    header, frames = gradient_video(64, 64, 8)
    data = encode_video(frames, EncoderConfig(model_kind=MODEL_UNIFORM, gop_length=4))
    report = rate_report(data)
    types = {}
    for row in report.rows:
        types[row.frame] = row.frame_type
    assert [types[i] for i in range(8)] == [
        FRAME_TYPE_I, FRAME_TYPE_P, FRAME_TYPE_P, FRAME_TYPE_P,
        FRAME_TYPE_I, FRAME_TYPE_P, FRAME_TYPE_P, FRAME_TYPE_P,
    ]
    _, out = decode_video(data)
    assert frames_equal(frames, out)


def test_mono_video_round_trip():
    rng = np.random.default_rng(8)
    frames = [FrameYUV420(y=make_plane(50, 40, rng)) for _ in range(3)]
    data = encode_video(frames, EncoderConfig(model_kind=MODEL_ADAPTIVE))
    _, out = decode_video(data)
    assert frames_equal(frames, out)


def test_empty_input_rejected():
    with pytest.raises(ContractViolation):
        encode_video([], EncoderConfig())


def test_mixed_geometry_rejected():
    rng = np.random.default_rng(9)
    frames = [make_frame(64, 48, rng), make_frame(48, 64, rng)]
    with pytest.raises(ContractViolation):
        encode_video(frames, EncoderConfig())


def test_threads_do_not_change_bytes():
    header, frames = moving_square_video(96, 96, 3)
    base = encode_video(frames, EncoderConfig(model_kind=MODEL_ADAPTIVE, threads=1))
    threaded = encode_video(frames, EncoderConfig(model_kind=MODEL_ADAPTIVE, threads=4))
    assert base == threaded
    _, out = decode_video(threaded, threads=4)
    assert frames_equal(frames, out)


def test_header_round_trip_and_tags():
    header, frames = constant_video(64, 64, 2)
    vh = VideoHeader(64, 64, "yuv420", framerate="30000:1001")
    data = encode_video(frames, EncoderConfig(), video_header=vh)
    parsed, _ = parse_header(data)
    assert "F30000:1001" in parsed.stream_tags.split(" ")
    out_header, _ = decode_video(data)
    assert out_header.framerate == "30000:1001"
    assert out_header.tags == vh.tags


def test_wrong_model_hash_refused(tiny_weights, tiny_weights_noref):
    header, frames = constant_video(64, 64, 2)
    config = EncoderConfig(model_kind=MODEL_TRANSFORMER, weights=tiny_weights)
    data = encode_video(frames, config)
    with pytest.raises(ModelHashMismatchError):
        decode_video(data, weights=tiny_weights_noref)
    with pytest.raises(ContractViolation):
        decode_video(data)


def test_container_rejects_garbage_and_truncation():
    header, frames = constant_video(64, 64, 2)
    data = encode_video(frames, EncoderConfig())
    with pytest.raises(ContainerFormatError):
        decode_video(b"JUNK" + data[4:])
    with pytest.raises(ContainerFormatError):
        decode_video(data[:len(data) // 2])
    bad_version = bytearray(data)
    bad_version[4] = 0xEE
    with pytest.raises(ContainerFormatError):
        decode_video(bytes(bad_version))


def test_video_tamper_detected_or_contained():
    header, frames = gradient_video(64, 64, 2)
    data = encode_video(frames, EncoderConfig(model_kind=MODEL_ADAPTIVE))
    report = rate_report(data)
    payload_start = len(data) - report.total_payload_bits // 8
    rng = np.random.default_rng(10)
    for _ in range(8):
        bad = bytearray(data)
        idx = int(rng.integers(payload_start, len(data)))
        bad[idx] ^= 0x11
        try:
            _, out = decode_video(bytes(bad))
            assert not frames_equal(frames, out)
        except CodecError:
            pass


# ---------------------------------------------------------------------------
# Context symmetry: the invariant arithmetic coding rests on.

@pytest.mark.parametrize("model_kind", [MODEL_UNIFORM, MODEL_ADAPTIVE, MODEL_TRANSFORMER])
def test_encoder_decoder_contexts_identical(model_kind, tiny_weights):
    header, frames = moving_square_video(64, 48, 3)
    weights = tiny_weights if model_kind == MODEL_TRANSFORMER else None
    config = EncoderConfig(delta=1, model_kind=model_kind, weights=weights)
    enc_trace, dec_trace = [], []
    data = encode_video(frames, config,
                        trace=lambda label, g, d: enc_trace.append((label, g, d)))
    _, out = decode_video(data, weights=weights,
                          trace=lambda label, g, d: dec_trace.append((label, g, d)))
    assert frames_equal(frames, out)
    assert len(enc_trace) > 0
    assert enc_trace == dec_trace


# ---------------------------------------------------------------------------
# Rate accounting.

def test_rate_accounting_identities():
    header, frames = moving_square_video(96, 96, 4)
    data = encode_video(frames, EncoderConfig(model_kind=MODEL_ADAPTIVE, gop_length=2))
    report = rate_report(data)

    # total = payload + header + frame markers + per-patch prefixes
    parsed, first_frame_offset = parse_header(data)
    n_patches = len(report.rows)
    analytic_overhead = first_frame_offset * 8 + 8 * parsed.frame_count + 32 * n_patches
    assert report.overhead_bits == analytic_overhead
    assert report.total_stream_bits == report.total_payload_bits + analytic_overhead

    assert report.intra_bits + report.predicted_bits == report.total_payload_bits
    assert sum(report.frame_bits(f) for f in range(parsed.frame_count)) \
        == report.total_payload_bits

    per_frame_sum = sum(
        report.frame_rate_percent(f) / 100.0 * report.raw_bits_per_frame
        for f in range(parsed.frame_count)
    )
    assert per_frame_sum == pytest.approx(report.total_payload_bits)


def test_rate_report_csv_shape():
    header, frames = constant_video(64, 64, 2)
    data = encode_video(frames, EncoderConfig())
    csv = rate_report(data).to_csv()
    lines = csv.strip().split("\n")
    assert lines[0] == "frame,type,plane,patch_row,patch_col,bits"
    # 2 frames x (4 Y + 1 U + 1 V) patches
    assert len(lines) == 1 + 2 * 6
    assert lines[1].startswith("0,I,Y,0,0,")


def test_ideal_rate_bounds_actual_bits():
    """Coded bits land in [ideal, ideal + 64] per patch stream.

    Uses a 2-layer model so the step loop and predict_group share the exact
    full-forward path and therefore the exact CDFs.
    """
    from nlvc.range_coder import ideal_bits
    rng = np.random.default_rng(11)
    schedule = build_schedule(2, 32)
    config = transformer_core.ModelConfig(layers=2, dim=8, heads=2)
    model = TransformerModel(transformer_core.random_weights(config, seed=21))
    grid = random_grid(rng)

    from nlvc.entropy_models import ModelContext
    from nlvc.tokenizer import MASK_ID
    symbols, cums = [], []
    work = np.full((32, 32), MASK_ID, dtype=np.int16)
    for g in range(schedule.group_count):
        ctx = ModelContext(TokenGrid(work.copy(), KIND_IFRAME), None, g, schedule)
        for pos, cdf in model.predict_group(ctx):
            symbols.append(int(grid.tokens[pos]))
            cums.append(cdf.cum)
        for pos in schedule.positions(g):
            work[pos] = grid.tokens[pos]
    stream = encode_patch(grid, None, model, schedule)
    ideal = ideal_bits(cums, symbols)
    assert ideal <= len(stream.data) * 8 <= ideal + 64
