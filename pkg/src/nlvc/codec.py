"""Full pipeline: GOP structure, per-plane group-wise coding, container format.

Container layout (version 1, little-endian):

    magic       "NLVC"
    version     u16
    width       u16
    height      u16
    frame_count u32
    chroma      u8   (0 = mono, 1 = yuv420)
    delta       u8
    gop_length  u16  (0 = single leading intra frame)
    model_kind  u8   (0 uniform, 1 adaptive, 2 transformer)
    model_hash  u64  (0 for non-neural models)
    tag_len     u16  followed by tag_len bytes of verbatim Y4M header tags
    frames      frame_count records

Each frame record is one type byte (0 intra, 1 predicted) followed, for
every plane in Y/U/V order, by the plane's patches in raster order, each as
a u32 byte length plus the range-coded payload. Patch streams are
independent, so a damaged patch cannot corrupt its neighbours.

Encoder and decoder drive the entropy model through identical context
sequences. For learned models both sides batch every patch of a frame (all
planes) into one prediction per group step; since the batch composition is
a pure function of the header, the float work is literally identical on
both sides, which is what makes the arithmetic coding exact.
"""

from __future__ import annotations

import hashlib
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .entropy_models import (
    MODEL_ADAPTIVE,
    MODEL_TRANSFORMER,
    MODEL_UNIFORM,
    TransformerModel,
    model_for_kind,
)
from .errors import (
    ContainerFormatError,
    ContractViolation,
    ModelHashMismatchError,
)
from .frame_io import CHROMA_MONO, CHROMA_YUV420, FramePlane, FrameYUV420, VideoHeader
from .group_schedule import GroupSchedule, build_schedule
from .range_coder import CodedStream, RangeDecoder, RangeEncoder
from .tiling import PATCH_SIDE, PATCH_TOKENS, Patch, extract_patches, layout_for, pad_plane, reassemble
from .tokenizer import (
    KIND_IFRAME,
    KIND_PFRAME,
    MASK_ID,
    TokenGrid,
    detokenize_i,
    detokenize_p,
    reference_tokens,
    tokenize_i,
    tokenize_p,
)
from . import transformer_core

CONTAINER_MAGIC = b"NLVC"
CONTAINER_VERSION = 1

FRAME_TYPE_I = 0
FRAME_TYPE_P = 1

_CHROMA_IDS = {CHROMA_MONO: 0, CHROMA_YUV420: 1}
_CHROMA_NAMES = {v: k for k, v in _CHROMA_IDS.items()}

_HEADER_STRUCT = struct.Struct("<4sHHHIBBHBQ")

MODEL_NAMES = {"uniform": MODEL_UNIFORM, "adaptive": MODEL_ADAPTIVE, "transformer": MODEL_TRANSFORMER}
MODEL_IDS = {v: k for k, v in MODEL_NAMES.items()}

# Trace callback signature: (label, step, context_digest). The symmetry
# tests use it to prove encoder and decoder see identical model inputs.
TraceFn = Callable[[str, int, bytes], None]


@dataclass(frozen=True)
class BitstreamHeader:
    width: int
    height: int
    frame_count: int
    chroma: str
    delta: int
    gop_length: int
    model_kind: int
    model_hash: int
    stream_tags: str = ""

    def pack(self) -> bytes:
        tags = self.stream_tags.encode("utf-8")
        return (
            _HEADER_STRUCT.pack(
                CONTAINER_MAGIC, CONTAINER_VERSION, self.width, self.height,
                self.frame_count, _CHROMA_IDS[self.chroma], self.delta,
                self.gop_length, self.model_kind, self.model_hash,
            )
            + struct.pack("<H", len(tags))
            + tags
        )

    @property
    def group_count(self) -> int:
        return (self.delta + 1) * (PATCH_SIDE - 1) + 1

    def frame_type(self, index: int) -> int:
        if self.gop_length == 0:
            return FRAME_TYPE_I if index == 0 else FRAME_TYPE_P
        return FRAME_TYPE_I if index % self.gop_length == 0 else FRAME_TYPE_P

    def plane_dims(self) -> list[tuple[str, int, int]]:
        dims = [("Y", self.width, self.height)]
        if self.chroma == CHROMA_YUV420:
            cw, ch = (self.width + 1) // 2, (self.height + 1) // 2
            dims += [("U", cw, ch), ("V", cw, ch)]
        return dims


@dataclass
class EncoderConfig:
    delta: int = 2
    gop_length: int = 0
    model_kind: int = MODEL_UNIFORM
    weights: Optional[transformer_core.ModelWeights] = None
    threads: int = 1

    def __post_init__(self):
        if not 0 <= self.delta <= 255:
            raise ContractViolation("delta must fit in a byte")
        if self.model_kind == MODEL_TRANSFORMER and self.weights is None:
            raise ContractViolation("transformer model requires weights")


@dataclass(frozen=True)
class FrameRecord:
    """One coded frame: type byte plus per-plane, per-patch payloads."""

    frame_type: int
    plane_payloads: tuple[tuple[bytes, ...], ...]

    def pack(self) -> bytes:
        out = bytearray([self.frame_type])
        for plane in self.plane_payloads:
            for payload in plane:
                out += struct.pack("<I", len(payload))
                out += payload
        return bytes(out)

    @property
    def flat_payloads(self) -> list[bytes]:
        return [p for plane in self.plane_payloads for p in plane]

    @staticmethod
    def unpack(reader: "_Reader", patch_counts: Sequence[int], what: str) -> "FrameRecord":
        (ftype,) = reader.take(1, f"{what} type")
        planes = []
        for p_idx, count in enumerate(patch_counts):
            payloads = []
            for _ in range(count):
                (length,) = struct.unpack("<I", reader.take(4, f"{what} plane {p_idx} patch length"))
                payloads.append(reader.take(length, f"{what} plane {p_idx} patch payload"))
            planes.append(tuple(payloads))
        return FrameRecord(ftype, tuple(planes))


def _context_digest(tokens: np.ndarray, reference: Optional[np.ndarray], step: int) -> bytes:
    h = hashlib.blake2b(digest_size=16)
    h.update(step.to_bytes(4, "little"))
    h.update(np.ascontiguousarray(tokens).tobytes())
    if reference is not None:
        h.update(np.ascontiguousarray(reference).tobytes())
    return h.digest()


# ---------------------------------------------------------------------------
# Stateless engines: all patches advance in lockstep, one prediction per step.

def _encode_batched(model, schedule: GroupSchedule, kind: str,
                    token_mat: np.ndarray, ref_mat: Optional[np.ndarray],
                    label: str, trace: Optional[TraceFn]) -> list[bytes]:
    n_patches = len(token_mat)
    work = np.full((n_patches, PATCH_TOKENS), MASK_ID, dtype=np.int16)
    session = model.plane_session(work, ref_mat, kind)
    encoders = [RangeEncoder() for _ in range(n_patches)]
    for g in range(schedule.group_count):
        positions = schedule.flat_groups[g]
        if len(positions) == 0:
            continue
        if trace is not None:
            trace(label, g, _context_digest(work, ref_mat, g))
        rows = session.predict(work, positions)
        for i in range(n_patches):
            enc = encoders[i]
            cums = rows[i]
            symbols = token_mat[i, positions].tolist()
            for j, s in enumerate(symbols):
                enc.encode_span(int(cums[j, s]), int(cums[j, s + 1]))
        work[:, positions] = token_mat[:, positions]
        session.reveal(work, positions)
    return [enc.finish() for enc in encoders]


def _decode_batched(model, schedule: GroupSchedule, kind: str,
                    payloads: Sequence[bytes], ref_mat: Optional[np.ndarray],
                    label: str, trace: Optional[TraceFn]) -> np.ndarray:
    n_patches = len(payloads)
    work = np.full((n_patches, PATCH_TOKENS), MASK_ID, dtype=np.int16)
    session = model.plane_session(work, ref_mat, kind)
    decoders = [RangeDecoder(p) for p in payloads]
    for g in range(schedule.group_count):
        positions = schedule.flat_groups[g]
        if len(positions) == 0:
            continue
        if trace is not None:
            trace(label, g, _context_digest(work, ref_mat, g))
        rows = session.predict(work, positions)
        pos_list = positions.tolist()
        for i in range(n_patches):
            dec = decoders[i]
            cums = rows[i]
            row = work[i]
            for j, pos in enumerate(pos_list):
                row[pos] = dec.decode(cums[j])
        session.reveal(work, positions)
    return work


# ---------------------------------------------------------------------------
# Stateful engines: each patch owns a model replica; patches parallelize.

def _encode_patch_stateful(model, schedule: GroupSchedule, kind: str,
                           tokens: np.ndarray) -> bytes:
    enc = RangeEncoder()
    for g in range(schedule.group_count):
        positions = schedule.flat_groups[g]
        if len(positions) == 0:
            continue
        cum = model.current_cum(kind)
        symbols = tokens[positions].tolist()
        for s in symbols:
            enc.encode_span(int(cum[s]), int(cum[s + 1]))
        for pos, s in zip(schedule.groups[g], symbols):
            model.update(pos, s, kind)
    return enc.finish()


def _decode_patch_stateful(model, schedule: GroupSchedule, kind: str,
                           payload: bytes) -> np.ndarray:
    dec = RangeDecoder(payload)
    out = np.full(PATCH_TOKENS, MASK_ID, dtype=np.int16)
    for g in range(schedule.group_count):
        positions = schedule.flat_groups[g]
        if len(positions) == 0:
            continue
        cum = model.current_cum(kind)
        symbols = [dec.decode(cum) for _ in range(len(positions))]
        out[positions] = symbols
        for pos, s in zip(schedule.groups[g], symbols):
            model.update(pos, s, kind)
    return out


def _trace_reveal_order(schedule: GroupSchedule, token_mat: np.ndarray,
                        ref_mat: Optional[np.ndarray], label: str, trace: TraceFn) -> None:
    """Emit the same context digests the batched path would."""
    work = np.full(token_mat.shape, MASK_ID, dtype=np.int16)
    for g in range(schedule.group_count):
        positions = schedule.flat_groups[g]
        if len(positions) == 0:
            continue
        trace(label, g, _context_digest(work, ref_mat, g))
        work[:, positions] = token_mat[:, positions]


def _encode_frame_patches(model, schedule: GroupSchedule, kind: str,
                          token_mat: np.ndarray, ref_mat: Optional[np.ndarray],
                          threads: int, label: str, trace: Optional[TraceFn]) -> list[bytes]:
    if model.stateless:
        return _encode_batched(model, schedule, kind, token_mat, ref_mat, label, trace)
    if trace is not None:
        _trace_reveal_order(schedule, token_mat, ref_mat, label, trace)
    rows = [token_mat[i] for i in range(len(token_mat))]
    if threads > 1 and len(rows) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(
                lambda t: _encode_patch_stateful(model.clone_for_patch(), schedule, kind, t),
                rows))
    return [_encode_patch_stateful(model.clone_for_patch(), schedule, kind, t) for t in rows]


def _decode_frame_patches(model, schedule: GroupSchedule, kind: str,
                          payloads: Sequence[bytes], ref_mat: Optional[np.ndarray],
                          threads: int, label: str, trace: Optional[TraceFn]) -> np.ndarray:
    if model.stateless:
        return _decode_batched(model, schedule, kind, payloads, ref_mat, label, trace)
    if threads > 1 and len(payloads) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            decoded = list(pool.map(
                lambda p: _decode_patch_stateful(model.clone_for_patch(), schedule, kind, p),
                payloads))
    else:
        decoded = [_decode_patch_stateful(model.clone_for_patch(), schedule, kind, p)
                   for p in payloads]
    out = np.stack(decoded)
    if trace is not None:
        _trace_reveal_order(schedule, out, ref_mat, label, trace)
    return out


# ---------------------------------------------------------------------------
# Patch-level public operations.

def encode_patch(patch_tokens: TokenGrid, reference: Optional[TokenGrid],
                 model, schedule: GroupSchedule) -> CodedStream:
    """Code one fully known token grid into an independent stream.

    Stateful models are used as handed in (the caller replicates per patch);
    stateless models are shared. Reference must be present exactly for
    temporal grids.
    """
    if np.any(patch_tokens.tokens == MASK_ID):
        raise ContractViolation("encode_patch needs a fully revealed grid")
    if (patch_tokens.kind == KIND_PFRAME) != (reference is not None):
        raise ContractViolation("reference must be supplied iff coding a temporal grid")
    ref_mat = None if reference is None else reference.flat.reshape(1, -1)
    token_mat = patch_tokens.flat.reshape(1, -1)
    if model.stateless:
        data = _encode_batched(model, schedule, patch_tokens.kind,
                               token_mat, ref_mat, "patch", None)[0]
    else:
        data = _encode_patch_stateful(model, schedule, patch_tokens.kind, token_mat[0])
    return CodedStream(data, PATCH_TOKENS)


def decode_patch(stream: CodedStream, reference: Optional[TokenGrid],
                 model, schedule: GroupSchedule) -> TokenGrid:
    """Inverse of encode_patch; the grid kind is implied by the reference."""
    kind = KIND_PFRAME if reference is not None else KIND_IFRAME
    ref_mat = None if reference is None else reference.flat.reshape(1, -1)
    if model.stateless:
        tokens = _decode_batched(model, schedule, kind, [stream.data],
                                 ref_mat, "patch", None)[0]
    else:
        tokens = _decode_patch_stateful(model, schedule, kind, stream.data)
    return TokenGrid(tokens.reshape(PATCH_SIDE, PATCH_SIDE), kind)


# ---------------------------------------------------------------------------
# Video-level coding.

def _frame_token_mats(frame: FrameYUV420, prev: Optional[FrameYUV420],
                      want_reference: bool):
    """Tokenize all planes of one frame into a single patch batch.

    Returns (token_mat, ref_mat, patch_counts) where token_mat stacks the
    Y patches, then U, then V, each plane in raster order.
    """
    mats, refs, counts = [], [], []
    for p_idx, plane in enumerate(frame.planes):
        padded, layout = pad_plane(plane)
        patches = extract_patches(padded, layout)
        counts.append(layout.patch_count)
        if prev is None:
            mats.append(np.stack([tokenize_i(p).flat for p in patches]))
        else:
            prev_padded, _ = pad_plane(prev.planes[p_idx])
            prev_patches = extract_patches(prev_padded, layout)
            mats.append(np.stack(
                [tokenize_p(c, r).flat for c, r in zip(patches, prev_patches)]))
            if want_reference:
                refs.append(np.stack([reference_tokens(r).flat for r in prev_patches]))
    token_mat = np.vstack(mats)
    ref_mat = np.vstack(refs) if refs else None
    return token_mat, ref_mat, counts


def _model_wants_reference(model) -> bool:
    return isinstance(model, TransformerModel) and model.config.has_reference_embedding


def encode_video(frames: Sequence[FrameYUV420], config: EncoderConfig,
                 video_header: Optional[VideoHeader] = None,
                 trace: Optional[TraceFn] = None) -> bytes:
    """Compress a frame sequence into one self-describing byte stream."""
    if not frames:
        raise ContractViolation("cannot encode an empty frame sequence")
    first = frames[0]
    width, height = first.y.width, first.y.height
    chroma = CHROMA_MONO if first.u is None else CHROMA_YUV420
    for i, f in enumerate(frames):
        if (f.y.width, f.y.height) != (width, height) or (f.u is None) != (first.u is None):
            raise ContractViolation(f"frame {i} geometry differs from frame 0")

    if video_header is not None:
        tags = " ".join(video_header.tags)
    else:
        tags = " ".join(VideoHeader(width, height, chroma).tags)

    model = model_for_kind(config.model_kind, config.weights)
    model_hash = config.weights.content_hash if config.model_kind == MODEL_TRANSFORMER else 0
    schedule = build_schedule(config.delta)
    want_ref = _model_wants_reference(model)

    header = BitstreamHeader(
        width=width, height=height, frame_count=len(frames), chroma=chroma,
        delta=config.delta, gop_length=config.gop_length,
        model_kind=config.model_kind, model_hash=model_hash, stream_tags=tags,
    )
    out = bytearray(header.pack())

    for idx, frame in enumerate(frames):
        ftype = header.frame_type(idx)
        prev = frames[idx - 1] if ftype == FRAME_TYPE_P else None
        kind = KIND_IFRAME if prev is None else KIND_PFRAME
        token_mat, ref_mat, counts = _frame_token_mats(frame, prev, want_ref)
        payloads = _encode_frame_patches(model, schedule, kind, token_mat, ref_mat,
                                         config.threads, f"f{idx}", trace)
        planes = []
        base = 0
        for count in counts:
            planes.append(tuple(payloads[base:base + count]))
            base += count
        out += FrameRecord(ftype, tuple(planes)).pack()
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise ContainerFormatError(
                f"container truncated inside {what} "
                f"(need {n} bytes at offset {self.pos}, have {len(self.data) - self.pos})"
            )
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk


def parse_header(data: bytes) -> tuple[BitstreamHeader, int]:
    """Parse the container header; returns (header, offset of first frame)."""
    r = _Reader(data)
    raw = r.take(_HEADER_STRUCT.size, "header")
    magic, version, width, height, frame_count, chroma_id, delta, gop, model_kind, model_hash = \
        _HEADER_STRUCT.unpack(raw)
    if magic != CONTAINER_MAGIC:
        raise ContainerFormatError("bad magic: not a compressed video container")
    if version != CONTAINER_VERSION:
        raise ContainerFormatError(f"unsupported container version {version}")
    if chroma_id not in _CHROMA_NAMES:
        raise ContainerFormatError(f"unknown chroma id {chroma_id}")
    if model_kind not in MODEL_IDS:
        raise ContainerFormatError(f"unknown model kind {model_kind}")
    (tag_len,) = struct.unpack("<H", r.take(2, "tag length"))
    tags = r.take(tag_len, "stream tags").decode("utf-8")
    header = BitstreamHeader(
        width=width, height=height, frame_count=frame_count,
        chroma=_CHROMA_NAMES[chroma_id], delta=delta, gop_length=gop,
        model_kind=model_kind, model_hash=model_hash, stream_tags=tags,
    )
    return header, r.pos


def _framerate_from_tags(tags: str) -> str:
    for tag in tags.split(" "):
        if tag.startswith("F") and len(tag) > 1:
            return tag[1:]
    return "25:1"


def decode_video(data: bytes, weights: Optional[transformer_core.ModelWeights] = None,
                 threads: int = 1,
                 trace: Optional[TraceFn] = None) -> tuple[VideoHeader, list[FrameYUV420]]:
    """Exact inverse of encode_video. Verifies the model hash before decoding."""
    header, offset = parse_header(data)
    if header.model_kind == MODEL_TRANSFORMER:
        if weights is None:
            raise ContractViolation("this stream needs transformer weights to decode")
        if weights.content_hash != header.model_hash:
            raise ModelHashMismatchError(
                f"stream was encoded with weights {header.model_hash:#018x}, "
                f"supplied file hashes to {weights.content_hash:#018x}"
            )
    model = model_for_kind(header.model_kind, weights)
    schedule = build_schedule(header.delta)
    want_ref = _model_wants_reference(model)
    r = _Reader(data)
    r.pos = offset

    video_header = VideoHeader(
        width=header.width, height=header.height, chroma=header.chroma,
        framerate=_framerate_from_tags(header.stream_tags),
        frame_count=header.frame_count,
        tags=tuple(header.stream_tags.split(" ")) if header.stream_tags else (),
    )

    plane_dims = header.plane_dims()
    layouts = [layout_for(w, h) for _, w, h in plane_dims]
    counts = [lay.patch_count for lay in layouts]

    frames: list[FrameYUV420] = []
    for idx in range(header.frame_count):
        record = FrameRecord.unpack(r, counts, f"frame {idx}")
        expected = header.frame_type(idx)
        if record.frame_type != expected:
            raise ContainerFormatError(
                f"frame {idx} has type {record.frame_type}, "
                f"GOP structure requires {expected}"
            )
        prev = frames[idx - 1] if record.frame_type == FRAME_TYPE_P else None
        kind = KIND_IFRAME if prev is None else KIND_PFRAME
        payloads = record.flat_payloads

        prev_patches_per_plane = None
        ref_mat = None
        if prev is not None:
            prev_patches_per_plane = []
            refs = []
            for p_idx in range(len(plane_dims)):
                prev_padded, _ = pad_plane(prev.planes[p_idx])
                pp = extract_patches(prev_padded, layouts[p_idx])
                prev_patches_per_plane.append(pp)
                if want_ref:
                    refs.append(np.stack([reference_tokens(p).flat for p in pp]))
            if want_ref:
                ref_mat = np.vstack(refs)

        token_mat = _decode_frame_patches(model, schedule, kind, payloads, ref_mat,
                                          threads, f"f{idx}", trace)

        planes: list[FramePlane] = []
        base = 0
        for p_idx, layout in enumerate(layouts):
            patches = []
            for i in range(layout.patch_count):
                grid = TokenGrid(token_mat[base + i].reshape(PATCH_SIDE, PATCH_SIDE), kind)
                if prev is None:
                    decoded = detokenize_i(grid)
                else:
                    decoded = detokenize_p(grid, prev_patches_per_plane[p_idx][i])
                origin_r = (i // layout.patches_per_row) * PATCH_SIDE
                origin_c = (i % layout.patches_per_row) * PATCH_SIDE
                patches.append(Patch(origin_r, origin_c, decoded.samples))
            base += layout.patch_count
            planes.append(reassemble(patches, layout))
        if header.chroma == CHROMA_MONO:
            frames.append(FrameYUV420(y=planes[0]))
        else:
            frames.append(FrameYUV420(y=planes[0], u=planes[1], v=planes[2]))
    if r.pos != len(data):
        raise ContainerFormatError(f"{len(data) - r.pos} trailing bytes after last frame")
    return video_header, frames


# ---------------------------------------------------------------------------
# Rate reporting.

@dataclass(frozen=True)
class PatchRate:
    frame: int
    frame_type: int
    plane: str
    patch_row: int
    patch_col: int
    bits: int


@dataclass
class RateReport:
    """Per-patch bit accounting plus the aggregates the figures need.

    Frame-level numbers cover coded patch payloads only; container header,
    frame type bytes and length prefixes are reported as overhead_bits and
    included in the whole-video rate.
    """

    header: BitstreamHeader
    rows: list[PatchRate]
    total_stream_bits: int

    @property
    def total_payload_bits(self) -> int:
        return sum(r.bits for r in self.rows)

    @property
    def overhead_bits(self) -> int:
        """Everything that is not coded patch payload."""
        return self.total_stream_bits - self.total_payload_bits

    @property
    def raw_bits_per_frame(self) -> int:
        w, h = self.header.width, self.header.height
        if self.header.chroma == CHROMA_MONO:
            return w * h * 8
        return (w * h + 2 * ((w + 1) // 2) * ((h + 1) // 2)) * 8

    def frame_bits(self, frame: int) -> int:
        return sum(r.bits for r in self.rows if r.frame == frame)

    def frame_rate_percent(self, frame: int) -> float:
        return self.frame_bits(frame) / self.raw_bits_per_frame * 100.0

    @property
    def video_rate_percent(self) -> float:
        return self.total_stream_bits / (self.raw_bits_per_frame * self.header.frame_count) * 100.0

    @property
    def intra_bits(self) -> int:
        return sum(r.bits for r in self.rows if r.frame_type == FRAME_TYPE_I)

    @property
    def predicted_bits(self) -> int:
        return sum(r.bits for r in self.rows if r.frame_type == FRAME_TYPE_P)

    def to_csv(self) -> str:
        lines = ["frame,type,plane,patch_row,patch_col,bits"]
        for r in self.rows:
            t = "I" if r.frame_type == FRAME_TYPE_I else "P"
            lines.append(f"{r.frame},{t},{r.plane},{r.patch_row},{r.patch_col},{r.bits}")
        return "\n".join(lines) + "\n"


def rate_report(data: bytes) -> RateReport:
    """Bit accounting for a coded stream; walks structure without decoding."""
    header, offset = parse_header(data)
    r = _Reader(data)
    r.pos = offset
    layouts = [(name, layout_for(w, h)) for name, w, h in header.plane_dims()]
    counts = [lay.patch_count for _, lay in layouts]
    rows: list[PatchRate] = []
    for idx in range(header.frame_count):
        record = FrameRecord.unpack(r, counts, f"frame {idx}")
        for (name, layout), payloads in zip(layouts, record.plane_payloads):
            for i, payload in enumerate(payloads):
                rows.append(PatchRate(
                    frame=idx, frame_type=record.frame_type, plane=name,
                    patch_row=i // layout.patches_per_row,
                    patch_col=i % layout.patches_per_row,
                    bits=len(payload) * 8,
                ))
    return RateReport(header=header, rows=rows, total_stream_bits=len(data) * 8)
