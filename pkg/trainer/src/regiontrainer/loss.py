"""Differentiable purity-based segmentation losses.

Mirrors the planner toolkit's forward-only loss suite: weighted BCE with
a purity-difference weight, soft Dice, purity loss, block-max deep
supervision, and their hybrid sum. The purity matrices come from a fixed
(non-learned) 3x3 convolution. Verified against the planner's golden
fixture by the `verify-loss` command.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import torch
import torch.nn.functional as F

_KERNEL = torch.tensor(
    [[[[1.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 1.0]]]]
)


@dataclass(frozen=True)
class LossConfig:
    sigma_smoothing: float = 1.0
    alpha: float | None = None  # None -> 1 / (8 H W)
    beta: tuple[float, ...] = (1.0, 0.5, 0.25, 0.125)
    epsilon_clamp: float = 1e-7

    def alpha_for(self, shape) -> float:
        if self.alpha is not None:
            return self.alpha
        return 1.0 / (8.0 * shape[-2] * shape[-1])


def _as4d(t: torch.Tensor) -> torch.Tensor:
    if t.dim() == 2:
        return t.unsqueeze(0).unsqueeze(0)
    if t.dim() == 3:
        return t.unsqueeze(1)
    return t


def purity(t: torch.Tensor) -> torch.Tensor:
    """Eight-neighbor sum per cell with zero padding; shape-preserving."""
    x = _as4d(t)
    out = F.conv2d(x, _KERNEL.to(dtype=x.dtype, device=x.device), padding=1)
    return out.reshape(t.shape)


def weighted_bce(pred: torch.Tensor, gt: torch.Tensor,
                 config: LossConfig = LossConfig()) -> torch.Tensor:
    """Summed BCE, each pixel weighted by |purity difference| + sigma."""
    w = torch.abs(purity(gt) - purity(pred)) + config.sigma_smoothing
    p = torch.clamp(pred, config.epsilon_clamp, 1.0 - config.epsilon_clamp)
    return -torch.sum(w * (gt * torch.log(p) + (1.0 - gt) * torch.log(1.0 - p)))


def dice_coefficient(pred: torch.Tensor, gt: torch.Tensor) -> torch.Tensor:
    inter = torch.sum(pred * gt)
    return (2.0 * inter + 1.0) / (torch.sum(pred) + torch.sum(gt) + 1.0)


def dice_loss(pred: torch.Tensor, gt: torch.Tensor) -> torch.Tensor:
    return 1.0 - dice_coefficient(pred, gt)


def purity_loss(pred: torch.Tensor, gt: torch.Tensor) -> torch.Tensor:
    return torch.sum(torch.abs(purity(gt) - purity(pred)))


def downsample_mask(gt: torch.Tensor, level: int) -> torch.Tensor:
    """Block-max pooling by 2^level; a block is 1 iff any of its cells is."""
    if not 1 <= level <= 4:
        raise ValueError("level must be in [1, 4]")
    b = 2**level
    squeeze = gt.dim() == 2
    out = F.max_pool2d(_as4d(gt), b)
    return out.reshape(out.shape[-2:]) if squeeze else out.reshape(gt.shape[:-2] + out.shape[-2:])


def supervised_loss(side_outputs: Sequence[torch.Tensor], gt: torch.Tensor,
                    config: LossConfig = LossConfig()) -> torch.Tensor:
    total = torch.zeros((), dtype=gt.dtype, device=gt.device)
    for level, side in enumerate(side_outputs, start=1):
        target = downsample_mask(gt, level)
        if side.shape != target.shape:
            raise ValueError(
                f"side output {level} is {tuple(side.shape)}, expected {tuple(target.shape)}"
            )
        total = total + config.beta[level - 1] * (
            weighted_bce(side, target, config) + dice_loss(side, target)
        )
    return total


def hybrid_loss_diff(pred: torch.Tensor, side_outputs: Sequence[torch.Tensor],
                     gt: torch.Tensor, config: LossConfig = LossConfig()) -> torch.Tensor:
    """wBCE + Dice + alpha * purity loss + deep-supervision loss."""
    alpha = config.alpha_for(gt.shape)
    return (
        weighted_bce(pred, gt, config)
        + dice_loss(pred, gt)
        + alpha * purity_loss(pred, gt)
        + supervised_loss(side_outputs, gt, config)
    )
