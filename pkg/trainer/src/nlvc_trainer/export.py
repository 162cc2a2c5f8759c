"""Weight export in the codec's binary format, plus the parity fixture.

Weight format (shared contract, little-endian):

    magic   "NLVW", version u16 = 1
    config  7 x u32: layers, dim, heads, seq_len, vocab, has_ref, mlp_ratio
    tensors row-major float32 in a fixed order (see _tensor_order)
    hash    u64 = SHA-256 of all preceding bytes, first 8 bytes

Matrices are stored as (in_features, out_features), so torch Linear weights
are transposed on the way out. Embedding tables are stored as-is.

Parity fixture format ("NLVF", little-endian), the cross-implementation
oracle: a pinned masked input plus the logits this trainer computed for it,
so the codec's forward pass can be checked against training-side numerics.

    magic   "NLVF", version u16 = 1
    has_ref u8, pad u8, n_positions u32
    tokens  u16 x 1024
    ref     u16 x 1024 (only when has_ref)
    pos     u32 x n_positions
    logits  float32 x (n_positions * 512)
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np
import torch

from .masking import sample_masked_batch
from .model import MaskedTokenModel

WEIGHT_MAGIC = b"NLVW"
FIXTURE_MAGIC = b"NLVF"
VERSION = 1


def content_hash64(payload: bytes) -> int:
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "little")


def _tensor_order(model: MaskedTokenModel):
    """(array, name) pairs in serialization order."""
    def lin_w(lin):
        return lin.weight.detach().numpy().T  # (in, out) on disk

    cfg = model.config
    out = [
        (model.tok_emb.weight.detach().numpy(), "token_embedding"),
        (model.pos_emb.detach().numpy(), "positional_embedding"),
    ]
    if cfg.has_reference_embedding:
        out.append((model.ref_emb.weight.detach().numpy(), "reference_embedding"))
    for i, block in enumerate(model.blocks):
        p = f"layers.{i}."
        out += [
            (lin_w(block.q), p + "attn_q_w"),
            (block.q.bias.detach().numpy(), p + "attn_q_b"),
            (lin_w(block.k), p + "attn_k_w"),
            (block.k.bias.detach().numpy(), p + "attn_k_b"),
            (lin_w(block.v), p + "attn_v_w"),
            (block.v.bias.detach().numpy(), p + "attn_v_b"),
            (lin_w(block.o), p + "attn_o_w"),
            (block.o.bias.detach().numpy(), p + "attn_o_b"),
            (block.ln1.weight.detach().numpy(), p + "ln1_scale"),
            (block.ln1.bias.detach().numpy(), p + "ln1_shift"),
            (block.ln2.weight.detach().numpy(), p + "ln2_scale"),
            (block.ln2.bias.detach().numpy(), p + "ln2_shift"),
            (lin_w(block.mlp_in), p + "mlp_in_w"),
            (block.mlp_in.bias.detach().numpy(), p + "mlp_in_b"),
            (lin_w(block.mlp_out), p + "mlp_out_w"),
            (block.mlp_out.bias.detach().numpy(), p + "mlp_out_b"),
        ]
    out += [
        (model.final_ln.weight.detach().numpy(), "final_ln_scale"),
        (model.final_ln.bias.detach().numpy(), "final_ln_shift"),
        (lin_w(model.head), "head_w"),
        (model.head.bias.detach().numpy(), "head_b"),
    ]
    return out


def weights_blob(model: MaskedTokenModel) -> bytes:
    cfg = model.config
    payload = bytearray()
    payload += WEIGHT_MAGIC
    payload += struct.pack("<H", VERSION)
    payload += struct.pack(
        "<7I", cfg.layers, cfg.dim, cfg.heads, cfg.seq_len, cfg.vocab,
        int(cfg.has_reference_embedding), cfg.mlp_ratio,
    )
    for arr, _name in _tensor_order(model):
        payload += np.ascontiguousarray(arr, dtype="<f4").tobytes()
    return bytes(payload) + struct.pack("<Q", content_hash64(bytes(payload)))


def export_weights(model: MaskedTokenModel, path) -> int:
    """Write the weight file; returns its 64-bit content hash."""
    blob = weights_blob(model)
    with open(path, "wb") as f:
        f.write(blob)
    (stored,) = struct.unpack("<Q", blob[-8:])
    return stored


def make_parity_fixture(model: MaskedTokenModel, seed: int = 1234,
                        n_positions: int = 16):
    """Pinned (tokens, reference, positions, logits) for conformance checks."""
    cfg = model.config
    gen = torch.Generator().manual_seed(seed)
    clean = torch.randint(0, 511, (1, cfg.seq_len), generator=gen)
    masked, _, _, _ = sample_masked_batch(clean, t_floor=0.5, generator=gen)
    reference = None
    if cfg.has_reference_embedding:
        reference = torch.randint(0, 256, (1, cfg.seq_len), generator=gen) * 2
    positions = torch.randperm(cfg.seq_len, generator=gen)[:n_positions].sort().values
    model.eval()
    with torch.no_grad():
        logits = model(masked, reference)[0, positions]
    return (masked[0].numpy().astype(np.uint16),
            None if reference is None else reference[0].numpy().astype(np.uint16),
            positions.numpy().astype(np.uint32),
            logits.numpy().astype(np.float32))


def export_parity_fixture(model: MaskedTokenModel, path, seed: int = 1234) -> None:
    tokens, reference, positions, logits = make_parity_fixture(model, seed)
    with open(path, "wb") as f:
        f.write(FIXTURE_MAGIC)
        f.write(struct.pack("<H", VERSION))
        f.write(struct.pack("<BB", int(reference is not None), 0))
        f.write(struct.pack("<I", len(positions)))
        f.write(tokens.astype("<u2").tobytes())
        if reference is not None:
            f.write(reference.astype("<u2").tobytes())
        f.write(positions.astype("<u4").tobytes())
        f.write(logits.astype("<f4").tobytes())


def load_parity_fixture(path, seq_len: int = 1024, vocab: int = 512):
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != FIXTURE_MAGIC:
        raise ValueError("not a parity fixture file")
    (version,) = struct.unpack_from("<H", data, 4)
    if version != VERSION:
        raise ValueError(f"unsupported fixture version {version}")
    has_ref, _ = struct.unpack_from("<BB", data, 6)
    (n,) = struct.unpack_from("<I", data, 8)
    off = 12
    tokens = np.frombuffer(data, dtype="<u2", count=seq_len, offset=off)
    off += seq_len * 2
    reference = None
    if has_ref:
        reference = np.frombuffer(data, dtype="<u2", count=seq_len, offset=off)
        off += seq_len * 2
    positions = np.frombuffer(data, dtype="<u4", count=n, offset=off)
    off += n * 4
    logits = np.frombuffer(data, dtype="<f4", count=n * vocab, offset=off)
    return tokens, reference, positions, logits.reshape(n, vocab)
