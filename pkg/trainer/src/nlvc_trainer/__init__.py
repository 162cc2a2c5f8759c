"""Toy-scale masked-token trainer exporting codec-compatible weight files."""

from .export import export_parity_fixture, export_weights, load_parity_fixture
from .masking import masked_loss, mean_masked_ce, sample_masked_batch
from .model import FULL_CONFIG, MASK_ID, TINY_CONFIG, MaskedTokenModel, ModelConfig
from .train import TrainConfig, TrainResult, train

__all__ = [
    "FULL_CONFIG",
    "MASK_ID",
    "MaskedTokenModel",
    "ModelConfig",
    "TINY_CONFIG",
    "TrainConfig",
    "TrainResult",
    "export_parity_fixture",
    "export_weights",
    "load_parity_fixture",
    "masked_loss",
    "mean_masked_ce",
    "sample_masked_batch",
    "train",
]
