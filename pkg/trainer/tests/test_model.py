import math

import numpy as np
import pytest
import torch
import torch.nn.functional as F

import nlvc.transformer_core as tc

from nlvc_trainer.data import constant_intra_batch
from nlvc_trainer.export import weights_blob
from nlvc_trainer.masking import mean_masked_ce, sample_masked_batch
from nlvc_trainer.model import MASK_ID, MaskedTokenModel, ModelConfig


def test_untrained_loss_near_log_vocab():
    torch.manual_seed(0)
    model = MaskedTokenModel(ModelConfig(layers=1, dim=32, heads=2))
    rng = np.random.default_rng(0)
    gen = torch.Generator().manual_seed(1)
    tokens = constant_intra_batch(8, rng)
    masked, targets, mask, _ = sample_masked_batch(tokens, 1e-3, gen)
    with torch.no_grad():
        ce = float(mean_masked_ce(model(masked), targets, mask))
    assert abs(ce - math.log(512)) / math.log(512) < 0.02


def test_warm_start_shares_everything_but_reference():
    torch.manual_seed(1)
    intra = MaskedTokenModel(ModelConfig(layers=2, dim=16, heads=2))
    torch.manual_seed(2)
    temporal = MaskedTokenModel(ModelConfig(layers=2, dim=16, heads=2,
                                            has_reference_embedding=True))
    fresh_ref = temporal.ref_emb.weight.detach().clone()
    temporal.warm_start_from(intra)
    intra_params = dict(intra.named_parameters())
    for name, param in temporal.named_parameters():
        if name.startswith("ref_emb."):
            assert torch.equal(param.detach(), fresh_ref)
        else:
            assert torch.equal(param.detach(), intra_params[name].detach()), name


def test_reference_embedding_changes_output():
    torch.manual_seed(3)
    model = MaskedTokenModel(ModelConfig(layers=1, dim=16, heads=2,
                                         has_reference_embedding=True))
    tokens = torch.full((1, 1024), MASK_ID, dtype=torch.long)
    ref_a = torch.zeros(1, 1024, dtype=torch.long)
    ref_b = torch.full((1, 1024), 200, dtype=torch.long)
    with torch.no_grad():
        assert not torch.equal(model(tokens, ref_a), model(tokens, ref_b))
    plain = MaskedTokenModel(ModelConfig(layers=1, dim=16, heads=2))
    with pytest.raises(ValueError):
        plain(tokens, ref_a)


def test_gradient_matches_finite_differences_through_shared_format():
    """Autograd gradients vs central differences of the codec's forward.

    The perturbed weights travel through the binary weight format, so this
    one check covers the export path, the codec's loader, and both
    implementations of the architecture at once.
    """
    torch.manual_seed(4)
    model = MaskedTokenModel(ModelConfig(layers=1, dim=8, heads=1))
    gen = torch.Generator().manual_seed(9)
    tokens = torch.randint(0, 511, (1, 1024), generator=gen)
    mask = torch.rand(1, 1024, generator=gen) < 0.5
    tokens = tokens.masked_fill(mask, MASK_ID)
    pos = int(mask[0].nonzero()[50])
    target_symbol = 42

    logits = model(tokens)
    f = F.log_softmax(logits[0, pos, :511], dim=-1)[target_symbol]
    model.zero_grad()
    f.backward()
    grad_row = model.tok_emb.weight.grad[MASK_ID].detach().numpy()
    k = int(np.argmax(np.abs(grad_row)))
    g = float(grad_row[k])
    assert abs(g) > 0.1  # pick a direction with real signal

    def codec_log_softmax(blob: bytes) -> float:
        _, w = tc.load_weights(blob)
        lg = tc.forward(w, tokens[0].numpy().astype(np.int64), None, [pos])[0]
        z = lg[:511].astype(np.float64)
        z -= z.max()
        return float(z[target_symbol] - np.log(np.exp(z).sum()))

    h = 1e-3
    with torch.no_grad():
        orig = float(model.tok_emb.weight[MASK_ID, k])
        model.tok_emb.weight[MASK_ID, k] = orig + h
        f_plus = codec_log_softmax(weights_blob(model))
        model.tok_emb.weight[MASK_ID, k] = orig - h
        f_minus = codec_log_softmax(weights_blob(model))
        model.tok_emb.weight[MASK_ID, k] = orig
    fd = (f_plus - f_minus) / (2 * h)
    assert abs(fd - g) / abs(g) < 1e-3
