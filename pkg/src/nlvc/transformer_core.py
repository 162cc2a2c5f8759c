"""Deterministic forward pass of the bidirectional entropy model.

Pre-norm transformer blocks (norm -> attention -> residual, norm -> MLP ->
residual) with full bidirectional self-attention, learned absolute position
embeddings, exact GELU, standard LayerNorm (eps 1e-5), untied output head.
Everything runs in float32 with numpy's fixed reduction order, so repeated
calls in one process are bit-identical; cross-machine bit equality is not
promised, which is why streams record the weight hash.

Weight file format (version 1, little-endian throughout):

    magic   "NLVW" (4 bytes)
    version u16
    config  7 x u32: layers, dim, heads, seq_len, vocab, has_ref, mlp_ratio
    tensors row-major float32, in the exact order of tensor_layout()
    hash    u64, SHA-256 of all preceding bytes truncated to 8 bytes

The trainer writes this format byte-for-byte; the hash binds bitstreams to
the exact weights that produced them.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import erf

from .errors import ContractViolation, WeightFormatError
from .tiling import PATCH_TOKENS

WEIGHT_MAGIC = b"NLVW"
WEIGHT_VERSION = 1

_LN_EPS = 1e-5
_SQRT2 = np.float32(np.sqrt(2.0))


def content_hash64(payload: bytes) -> int:
    """64-bit content hash: SHA-256 truncated to its first 8 bytes (LE)."""
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "little")


@dataclass(frozen=True)
class ModelConfig:
    layers: int
    dim: int
    heads: int
    seq_len: int = PATCH_TOKENS
    vocab: int = 512
    has_reference_embedding: bool = False
    mlp_ratio: int = 4

    def __post_init__(self):
        if self.layers < 1:
            raise ContractViolation("model needs at least one layer")
        if self.dim % self.heads:
            raise ContractViolation(f"dim {self.dim} not divisible by heads {self.heads}")
        if self.seq_len != PATCH_TOKENS:
            raise ContractViolation(f"seq_len must be {PATCH_TOKENS} (one per patch position)")

    @property
    def hidden(self) -> int:
        return self.dim * self.mlp_ratio


# Full-scale configuration: 8 layers, width 384, 6 heads.
DEFAULT_CONFIG = ModelConfig(layers=8, dim=384, heads=6)


def tensor_layout(config: ModelConfig) -> list[tuple[str, tuple[int, ...]]]:
    """Ordered (name, shape) pairs; also the serialization order."""
    d, h = config.dim, config.hidden
    names: list[tuple[str, tuple[int, ...]]] = [
        ("token_embedding", (config.vocab, d)),
        ("positional_embedding", (config.seq_len, d)),
    ]
    if config.has_reference_embedding:
        names.append(("reference_embedding", (config.vocab, d)))
    for i in range(config.layers):
        p = f"layers.{i}."
        names += [
            (p + "attn_q_w", (d, d)), (p + "attn_q_b", (d,)),
            (p + "attn_k_w", (d, d)), (p + "attn_k_b", (d,)),
            (p + "attn_v_w", (d, d)), (p + "attn_v_b", (d,)),
            (p + "attn_o_w", (d, d)), (p + "attn_o_b", (d,)),
            (p + "ln1_scale", (d,)), (p + "ln1_shift", (d,)),
            (p + "ln2_scale", (d,)), (p + "ln2_shift", (d,)),
            (p + "mlp_in_w", (d, h)), (p + "mlp_in_b", (h,)),
            (p + "mlp_out_w", (h, d)), (p + "mlp_out_b", (d,)),
        ]
    names += [
        ("final_ln_scale", (d,)), ("final_ln_shift", (d,)),
        ("head_w", (d, config.vocab)), ("head_b", (config.vocab,)),
    ]
    return names


def param_count(config: ModelConfig) -> int:
    return sum(int(np.prod(shape)) for _, shape in tensor_layout(config))


@dataclass
class ModelWeights:
    config: ModelConfig
    tensors: dict[str, np.ndarray]
    content_hash: int = field(default=0)

    def __post_init__(self):
        expected = tensor_layout(self.config)
        expected_names = [n for n, _ in expected]
        if list(self.tensors.keys()) != expected_names:
            raise WeightFormatError("tensor set does not match the config's layout")
        for name, shape in expected:
            t = self.tensors[name]
            if t.shape != shape:
                raise WeightFormatError(f"tensor {name} has shape {t.shape}, expected {shape}")
            if t.dtype != np.float32:
                raise WeightFormatError(f"tensor {name} must be float32")
            if not np.all(np.isfinite(t)):
                raise WeightFormatError(f"tensor {name} contains non-finite values")
        if self.content_hash == 0:
            self.content_hash = content_hash64(_serialize_payload(self.config, self.tensors))

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    @property
    def param_count(self) -> int:
        return sum(t.size for t in self.tensors.values())


def random_weights(config: ModelConfig, seed: int = 0, scale: float = 0.02) -> ModelWeights:
    """Gaussian-initialized weights: zero biases/shifts, unit norm scales."""
    rng = np.random.default_rng(seed)
    tensors = {}
    for name, shape in tensor_layout(config):
        base = name.rsplit(".", 1)[-1]
        if base.endswith("_b") or base.endswith("_shift"):
            tensors[name] = np.zeros(shape, dtype=np.float32)
        elif base.endswith("_scale"):
            tensors[name] = np.ones(shape, dtype=np.float32)
        else:
            tensors[name] = rng.normal(0.0, scale, size=shape).astype(np.float32)
    return ModelWeights(config, tensors)


def _serialize_payload(config: ModelConfig, tensors: dict[str, np.ndarray]) -> bytes:
    out = bytearray()
    out += WEIGHT_MAGIC
    out += struct.pack("<H", WEIGHT_VERSION)
    out += struct.pack(
        "<7I",
        config.layers, config.dim, config.heads, config.seq_len,
        config.vocab, int(config.has_reference_embedding), config.mlp_ratio,
    )
    for name, _ in tensor_layout(config):
        t = np.ascontiguousarray(tensors[name], dtype=np.float32)
        if not t.dtype.byteorder in ("<", "="):
            t = t.astype("<f4")
        out += t.tobytes()
    return bytes(out)


def save_weights(weights: ModelWeights) -> bytes:
    payload = _serialize_payload(weights.config, weights.tensors)
    return payload + struct.pack("<Q", content_hash64(payload))


def write_weights(path, weights: ModelWeights) -> None:
    with open(path, "wb") as f:
        f.write(save_weights(weights))


def load_weights(data: bytes) -> tuple[ModelConfig, ModelWeights]:
    """Parse a weight blob, verifying structure and the trailing content hash."""
    if len(data) < 4 or data[:4] != WEIGHT_MAGIC:
        raise WeightFormatError("bad magic: not a model weight file")
    if len(data) < 6:
        raise WeightFormatError("truncated before version field")
    (version,) = struct.unpack_from("<H", data, 4)
    if version != WEIGHT_VERSION:
        raise WeightFormatError(f"unsupported weight format version {version}")
    if len(data) < 6 + 28:
        raise WeightFormatError("truncated inside config block")
    layers, dim, heads, seq_len, vocab, has_ref, mlp_ratio = struct.unpack_from("<7I", data, 6)
    try:
        config = ModelConfig(
            layers=layers, dim=dim, heads=heads, seq_len=seq_len, vocab=vocab,
            has_reference_embedding=bool(has_ref), mlp_ratio=mlp_ratio,
        )
    except ContractViolation as exc:
        raise WeightFormatError(f"invalid config: {exc}") from exc

    offset = 6 + 28
    tensors = {}
    for name, shape in tensor_layout(config):
        nbytes = int(np.prod(shape)) * 4
        if offset + nbytes > len(data) - 8:
            raise WeightFormatError(f"file truncated inside tensor {name}")
        flat = np.frombuffer(data, dtype="<f4", count=int(np.prod(shape)), offset=offset)
        tensors[name] = flat.reshape(shape).astype(np.float32)
        offset += nbytes
    if offset + 8 != len(data):
        raise WeightFormatError(
            f"trailing garbage: {len(data) - offset - 8} unexpected bytes after tensors"
        )
    (stored_hash,) = struct.unpack_from("<Q", data, offset)
    computed = content_hash64(data[:offset])
    if stored_hash != computed:
        raise WeightFormatError("content hash mismatch: file corrupted")
    weights = ModelWeights(config, tensors, content_hash=stored_hash)
    return config, weights


def read_weights(path) -> tuple[ModelConfig, ModelWeights]:
    with open(path, "rb") as f:
        return load_weights(f.read())


def _layer_norm(x: np.ndarray, scale: np.ndarray, shift: np.ndarray) -> np.ndarray:
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    return xc / np.sqrt(var + _LN_EPS) * scale + shift


def _gelu(x: np.ndarray) -> np.ndarray:
    return np.float32(0.5) * x * (np.float32(1.0) + erf(x / _SQRT2))


def _attend(q: np.ndarray, k: np.ndarray, v: np.ndarray, heads: int) -> np.ndarray:
    """Scaled-dot attention of projected q against full k/v; no causal mask."""
    B, nq, D = q.shape
    S = k.shape[1]
    hd = D // heads
    if heads == 1:
        scores = (q @ k.transpose(0, 2, 1)) / np.float32(np.sqrt(hd))
        scores -= scores.max(axis=-1, keepdims=True)
        weights = np.exp(scores)
        weights /= weights.sum(axis=-1, keepdims=True)
        return weights @ v
    qh = q.reshape(B, nq, heads, hd).transpose(0, 2, 1, 3)
    kh = k.reshape(B, S, heads, hd).transpose(0, 2, 1, 3)
    vh = v.reshape(B, S, heads, hd).transpose(0, 2, 1, 3)
    scores = (qh @ kh.transpose(0, 1, 3, 2)) / np.float32(np.sqrt(hd))
    scores -= scores.max(axis=-1, keepdims=True)
    weights = np.exp(scores)
    weights /= weights.sum(axis=-1, keepdims=True)
    return (weights @ vh).transpose(0, 2, 1, 3).reshape(B, nq, D)


def _attention(x_norm: np.ndarray, w, heads: int, prefix: str,
               q_positions: Optional[np.ndarray]) -> np.ndarray:
    """Multi-head bidirectional attention; queries optionally restricted."""
    q_src = x_norm if q_positions is None else x_norm[:, q_positions]
    q = q_src @ w[prefix + "attn_q_w"] + w[prefix + "attn_q_b"]
    k = x_norm @ w[prefix + "attn_k_w"] + w[prefix + "attn_k_b"]
    v = x_norm @ w[prefix + "attn_v_w"] + w[prefix + "attn_v_b"]
    ctx = _attend(q, k, v, heads)
    return ctx @ w[prefix + "attn_o_w"] + w[prefix + "attn_o_b"]


def _mlp(x: np.ndarray, w, prefix: str) -> np.ndarray:
    h = _gelu(x @ w[prefix + "mlp_in_w"] + w[prefix + "mlp_in_b"])
    return h @ w[prefix + "mlp_out_w"] + w[prefix + "mlp_out_b"]


def forward_batch(weights: ModelWeights,
                  tokens: np.ndarray,
                  reference: Optional[np.ndarray],
                  positions: np.ndarray) -> np.ndarray:
    """Logits (B, len(positions), vocab) for a batch of token sequences.

    `tokens` is (B, seq_len) int with mask IDs at unrevealed positions;
    `reference` is an optional (B, seq_len) grid of intra-tokenized previous
    frame values. The reference term is added only when the model carries a
    reference table and a reference is supplied, so the same weights serve
    both conditioned and unconditioned grids.

    Only the last block restricts its queries to `positions`; earlier blocks
    must run at every position because their outputs feed the whole sequence.
    """
    config = weights.config
    if tokens.ndim != 2 or tokens.shape[1] != config.seq_len:
        raise ContractViolation(f"tokens must be (B, {config.seq_len})")
    if reference is not None and reference.shape != tokens.shape:
        raise ContractViolation("reference grid shape must match tokens")
    if reference is not None and not config.has_reference_embedding:
        raise ContractViolation("model has no reference embedding table")

    w = weights.tensors
    x = w["token_embedding"][tokens] + w["positional_embedding"][np.newaxis, :, :]
    if reference is not None:
        x = x + w["reference_embedding"][reference]

    positions = np.asarray(positions, dtype=np.int64)
    last = config.layers - 1
    for i in range(config.layers):
        p = f"layers.{i}."
        if i < last:
            x = x + _attention(_layer_norm(x, w[p + "ln1_scale"], w[p + "ln1_shift"]),
                               w, config.heads, p, None)
            x = x + _mlp(_layer_norm(x, w[p + "ln2_scale"], w[p + "ln2_shift"]), w, p)
        else:
            a = _attention(_layer_norm(x, w[p + "ln1_scale"], w[p + "ln1_shift"]),
                           w, config.heads, p, positions)
            xq = x[:, positions] + a
            xq = xq + _mlp(_layer_norm(xq, w[p + "ln2_scale"], w[p + "ln2_shift"]), w, p)
            x = xq

    h = _layer_norm(x, w["final_ln_scale"], w["final_ln_shift"])
    return h @ w["head_w"] + w["head_b"]


def forward(weights: ModelWeights,
            tokens: np.ndarray,
            reference: Optional[np.ndarray],
            positions) -> np.ndarray:
    """Single-sequence wrapper: (seq_len,) tokens -> (len(positions), vocab)."""
    ref = None if reference is None else reference.reshape(1, -1)
    return forward_batch(weights, tokens.reshape(1, -1), ref,
                         np.asarray(positions, dtype=np.int64))[0]


class ForwardSession:
    """Repeated group-step prediction over one batch of sequences.

    The generic session simply reruns forward_batch on the current tokens.
    For single-block models IncrementalSession below is much cheaper; use
    make_session() to pick automatically. Encoder and decoder must drive
    sessions with identical call sequences, which the codec guarantees.
    """

    def __init__(self, weights: ModelWeights, reference: Optional[np.ndarray]):
        self.weights = weights
        self.reference = reference

    def predict(self, tokens: np.ndarray, positions: np.ndarray) -> np.ndarray:
        return forward_batch(self.weights, tokens, self.reference, positions)

    def reveal(self, tokens: np.ndarray, positions: np.ndarray) -> None:
        pass


class IncrementalSession(ForwardSession):
    """Group-step prediction for 1-layer models with cached per-row state.

    With a single block, a position's embedding, pre-attention norm and K/V
    rows depend only on that position's own inputs, so revealing a group
    invalidates exactly the revealed rows. Queries are taken from rows that
    are still masked, whose cached state is untouched, hence every step
    costs O(group * seq) instead of O(seq**2).
    """

    def __init__(self, weights: ModelWeights, tokens: np.ndarray,
                 reference: Optional[np.ndarray]):
        if weights.config.layers != 1:
            raise ContractViolation("incremental sessions require a 1-layer model")
        super().__init__(weights, reference)
        self._x = self._embed(tokens, slice(None))
        w = weights.tensors
        ln = _layer_norm(self._x, w["layers.0.ln1_scale"], w["layers.0.ln1_shift"])
        self._k = ln @ w["layers.0.attn_k_w"] + w["layers.0.attn_k_b"]
        self._v = ln @ w["layers.0.attn_v_w"] + w["layers.0.attn_v_b"]
        self._ln1 = ln

    def _embed(self, tokens: np.ndarray, cols) -> np.ndarray:
        w = self.weights.tensors
        x = w["token_embedding"][tokens[:, cols]] + w["positional_embedding"][cols]
        if self.reference is not None and self.weights.config.has_reference_embedding:
            x = x + w["reference_embedding"][self.reference[:, cols]]
        return x

    def reveal(self, tokens: np.ndarray, positions: np.ndarray) -> None:
        w = self.weights.tensors
        rows = self._embed(tokens, positions)
        self._x[:, positions] = rows
        ln = _layer_norm(rows, w["layers.0.ln1_scale"], w["layers.0.ln1_shift"])
        self._ln1[:, positions] = ln
        self._k[:, positions] = ln @ w["layers.0.attn_k_w"] + w["layers.0.attn_k_b"]
        self._v[:, positions] = ln @ w["layers.0.attn_v_w"] + w["layers.0.attn_v_b"]

    def predict(self, tokens: np.ndarray, positions: np.ndarray) -> np.ndarray:
        w = self.weights.tensors
        cfg = self.weights.config
        q = self._ln1[:, positions] @ w["layers.0.attn_q_w"] + w["layers.0.attn_q_b"]
        ctx = _attend(q, self._k, self._v, cfg.heads)
        attn = ctx @ w["layers.0.attn_o_w"] + w["layers.0.attn_o_b"]
        xq = self._x[:, positions] + attn
        xq = xq + _mlp(_layer_norm(xq, w["layers.0.ln2_scale"], w["layers.0.ln2_shift"]),
                       w, "layers.0.")
        h = _layer_norm(xq, w["final_ln_scale"], w["final_ln_shift"])
        return h @ w["head_w"] + w["head_b"]


def make_session(weights: ModelWeights, tokens: np.ndarray,
                 reference: Optional[np.ndarray]) -> ForwardSession:
    if weights.config.layers == 1:
        return IncrementalSession(weights, tokens, reference)
    return ForwardSession(weights, reference)


def softmax_over_alphabet(logits: np.ndarray) -> np.ndarray:
    """Probabilities over the 511 codeable tokens; the mask logit is dropped.

    Computed in float64 with max subtraction, so the result sums to 1 within
    1e-12 and never overflows.
    """
    z = np.asarray(logits, dtype=np.float64)[..., :511]
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)
