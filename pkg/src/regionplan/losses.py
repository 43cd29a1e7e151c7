"""Purity-based segmentation losses and metrics, forward-only.

All functions are pure and operate on 2-D numpy arrays: predictions are
probabilities in [0, 1], ground truth is binary. These double as the
golden oracle for the differentiable trainer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage

# 3x3 eight-neighbor kernel with a zero center.
PURITY_KERNEL = np.array([[1, 1, 1], [1, 0, 1], [1, 1, 1]], dtype=np.float64)


@dataclass(frozen=True)
class LossConfig:
    sigma_smoothing: float = 1.0
    alpha: float | None = None  # None -> 1 / (8 H W), computed per input
    beta: tuple[float, ...] = (1.0, 0.5, 0.25, 0.125)
    epsilon_clamp: float = 1e-7

    def __post_init__(self):
        if self.sigma_smoothing < 0:
            raise ValueError("sigma_smoothing must be non-negative")
        if not 0 < self.epsilon_clamp < 0.5:
            raise ValueError("epsilon_clamp must be in (0, 0.5)")

    def alpha_for(self, shape: tuple[int, int]) -> float:
        if self.alpha is not None:
            return self.alpha
        return 1.0 / (8.0 * shape[0] * shape[1])


def _as2d(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.size == 0:
        raise ValueError("expected a non-empty 2-D array")
    return a


def _check_same_shape(pred: np.ndarray, gt: np.ndarray) -> None:
    if pred.shape != gt.shape:
        raise ValueError(f"shape mismatch: pred {pred.shape} vs gt {gt.shape}")


def purity_matrix(grid) -> np.ndarray:
    """Eight-neighbor sum of each cell (zero padding at the border).

    Accepts real-valued inputs so the estimated matrix can be computed
    from raw probabilities.
    """
    grid = _as2d(grid)
    return ndimage.correlate(grid, PURITY_KERNEL, mode="constant", cval=0.0)


def weighted_bce(pred, gt, config: LossConfig = LossConfig()) -> float:
    """Pixel-level BCE, each pixel weighted by |purity difference| + sigma."""
    pred, gt = _as2d(pred), _as2d(gt)
    _check_same_shape(pred, gt)
    w = np.abs(purity_matrix(gt) - purity_matrix(pred)) + config.sigma_smoothing
    p = np.clip(pred, config.epsilon_clamp, 1.0 - config.epsilon_clamp)
    return float(-np.sum(w * (gt * np.log(p) + (1.0 - gt) * np.log(1.0 - p))))


def dice_loss(pred, gt) -> float:
    """Soft Dice loss with +1 smoothing (empty vs empty has coefficient 1)."""
    return 1.0 - dice_coefficient(pred, gt)


def dice_coefficient(pred, gt) -> float:
    pred, gt = _as2d(pred), _as2d(gt)
    _check_same_shape(pred, gt)
    intersection = float(np.sum(pred * gt))
    return (2.0 * intersection + 1.0) / (float(np.sum(pred)) + float(np.sum(gt)) + 1.0)


def purity_loss(pred, gt) -> float:
    """Sum of absolute differences between the two purity matrices."""
    pred, gt = _as2d(pred), _as2d(gt)
    _check_same_shape(pred, gt)
    return float(np.sum(np.abs(purity_matrix(gt) - purity_matrix(pred))))


def downsample_mask(gt, level: int) -> np.ndarray:
    """Block-max pooling by 2^level; a block is 1 iff any of its cells is."""
    gt = _as2d(gt)
    if not 1 <= level <= 4:
        raise ValueError("level must be in [1, 4]")
    b = 2**level
    h, w = gt.shape
    if h % b or w % b:
        raise ValueError(f"dimensions {w}x{h} not divisible by {b}")
    return gt.reshape(h // b, b, w // b, b).max(axis=(1, 3))


def supervised_loss(side_outputs: Sequence, gt, config: LossConfig = LossConfig()) -> float:
    """Deep-supervision loss: sum of beta_l * (wBCE + Dice) per level,

    each level compared against the block-max-downsampled ground truth.
    """
    gt = _as2d(gt)
    total = 0.0
    for level, side in enumerate(side_outputs, start=1):
        side = _as2d(side)
        target = downsample_mask(gt, level)
        if side.shape != target.shape:
            raise ValueError(
                f"side output {level} is {side.shape}, expected {target.shape}"
            )
        total += config.beta[level - 1] * (
            weighted_bce(side, target, config) + dice_loss(side, target)
        )
    return total


def hybrid_loss(pred, side_outputs: Sequence, gt, config: LossConfig = LossConfig()) -> float:
    """wBCE + Dice + alpha * purity loss + deep-supervision loss."""
    pred, gt = _as2d(pred), _as2d(gt)
    alpha = config.alpha_for(gt.shape)
    return (
        weighted_bce(pred, gt, config)
        + dice_loss(pred, gt)
        + alpha * purity_loss(pred, gt)
        + supervised_loss(side_outputs, gt, config)
    )
