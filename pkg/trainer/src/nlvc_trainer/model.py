"""Bidirectional masked-token transformer, torch edition.

Architecture contract (must match the codec's inference stack exactly):
pre-norm blocks (norm -> attention -> residual, norm -> MLP -> residual),
full bidirectional attention scaled by sqrt(head_dim), exact (erf) GELU,
LayerNorm with eps 1e-5, learned absolute position embeddings, optional
additive reference embedding, untied output head with bias. Initialization
is N(0, 0.02) for matrices and embeddings, zeros for biases and shifts,
ones for norm scales, so a fresh model predicts the vocabulary almost
uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn as nn
import torch.nn.functional as F

SEQ_LEN = 1024
VOCAB = 512
MASK_ID = 511


@dataclass(frozen=True)
class ModelConfig:
    layers: int
    dim: int
    heads: int
    seq_len: int = SEQ_LEN
    vocab: int = VOCAB
    has_reference_embedding: bool = False
    mlp_ratio: int = 4

    def __post_init__(self):
        assert self.dim % self.heads == 0, "dim must divide evenly into heads"
        assert self.layers >= 1

    @property
    def hidden(self) -> int:
        return self.dim * self.mlp_ratio


# Desk-scale default: minutes on commodity CPUs, even two-core ones.
TINY_CONFIG = ModelConfig(layers=1, dim=32, heads=2)

# Full-scale configuration matching the codec's parameter-count checks.
FULL_CONFIG = ModelConfig(layers=8, dim=384, heads=6)


class Block(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        d = config.dim
        self.heads = config.heads
        self.ln1 = nn.LayerNorm(d)
        self.q = nn.Linear(d, d)
        self.k = nn.Linear(d, d)
        self.v = nn.Linear(d, d)
        self.o = nn.Linear(d, d)
        self.ln2 = nn.LayerNorm(d)
        self.mlp_in = nn.Linear(d, config.hidden)
        self.mlp_out = nn.Linear(config.hidden, d)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        B, S, D = x.shape
        hd = D // self.heads
        a = self.ln1(x)
        q = self.q(a).view(B, S, self.heads, hd).transpose(1, 2)
        k = self.k(a).view(B, S, self.heads, hd).transpose(1, 2)
        v = self.v(a).view(B, S, self.heads, hd).transpose(1, 2)
        att = torch.softmax(q @ k.transpose(-2, -1) / hd ** 0.5, dim=-1)
        ctx = (att @ v).transpose(1, 2).reshape(B, S, D)
        x = x + self.o(ctx)
        h = F.gelu(self.mlp_in(self.ln2(x)))
        return x + self.mlp_out(h)


class MaskedTokenModel(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.tok_emb = nn.Embedding(config.vocab, config.dim)
        self.pos_emb = nn.Parameter(torch.zeros(config.seq_len, config.dim))
        if config.has_reference_embedding:
            self.ref_emb = nn.Embedding(config.vocab, config.dim)
        else:
            self.ref_emb = None
        self.blocks = nn.ModuleList(Block(config) for _ in range(config.layers))
        self.final_ln = nn.LayerNorm(config.dim)
        self.head = nn.Linear(config.dim, config.vocab)
        self.apply(self._init)
        nn.init.normal_(self.pos_emb, std=0.02)

    @staticmethod
    def _init(module: nn.Module) -> None:
        if isinstance(module, nn.Linear):
            nn.init.normal_(module.weight, std=0.02)
            nn.init.zeros_(module.bias)
        elif isinstance(module, nn.Embedding):
            nn.init.normal_(module.weight, std=0.02)
        elif isinstance(module, nn.LayerNorm):
            nn.init.ones_(module.weight)
            nn.init.zeros_(module.bias)

    def forward(self, tokens: torch.Tensor,
                reference: torch.Tensor | None = None) -> torch.Tensor:
        x = self.tok_emb(tokens) + self.pos_emb
        if reference is not None:
            if self.ref_emb is None:
                raise ValueError("model has no reference embedding table")
            x = x + self.ref_emb(reference)
        for block in self.blocks:
            x = block(x)
        return self.head(self.final_ln(x))

    def warm_start_from(self, other: "MaskedTokenModel") -> None:
        """Copy every shared tensor; the reference table keeps its fresh init."""
        own = dict(self.named_parameters())
        for name, param in other.named_parameters():
            if name.startswith("ref_emb."):
                continue
            own[name].data.copy_(param.data)
