"""Neural region predictor for the regionplan planner.

Trains an attention-gated encoder-decoder on regionplan datasets and
exports region probability maps in the planner's PGM protocol.
"""

from .data import load_records, rasterize_input
from .loss import (
    LossConfig,
    dice_coefficient,
    dice_loss,
    downsample_mask,
    hybrid_loss_diff,
    purity,
    purity_loss,
    supervised_loss,
    weighted_bce,
)
from .model import NetworkConfig, RegionNet, build_network
from .train import TrainConfig, load_checkpoint, predict_export, train

__version__ = "0.1.0"

__all__ = [
    "LossConfig",
    "NetworkConfig",
    "RegionNet",
    "TrainConfig",
    "build_network",
    "dice_coefficient",
    "dice_loss",
    "downsample_mask",
    "hybrid_loss_diff",
    "load_checkpoint",
    "load_records",
    "predict_export",
    "purity",
    "purity_loss",
    "rasterize_input",
    "supervised_loss",
    "train",
    "weighted_bce",
]
