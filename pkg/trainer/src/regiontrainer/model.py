"""Encoder-decoder region predictor with channel-wise attention.

Four encoder stages of "SE-Res Conv + Conv-down" halve the resolution
and double the channels; five decoder stages of "SE-Res Conv + SE + Up"
recover it, concatenating the mirrored encoder features before each
block. Each of the first four decoder stages also emits a side output
(1x1 convolution + sigmoid) at its pre-upsample resolution for deep
supervision.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn


@dataclass(frozen=True)
class NetworkConfig:
    input_size: int = 64
    base_channels: int = 8  # 64 reproduces the full-scale channel table
    se_reduction: int = 4
    leaky_slope: float = 0.01

    def __post_init__(self):
        if self.input_size < 16 or self.input_size & (self.input_size - 1):
            raise ValueError("input_size must be a power of two, at least 16")
        if self.base_channels < 1:
            raise ValueError("base_channels must be positive")


class SEBlock(nn.Module):
    """Squeeze-and-Excitation channel gate: GP-FC-ReLU-FC-Sigmoid, scale."""

    def __init__(self, channels: int, reduction: int):
        super().__init__()
        hidden = max(1, channels // reduction)
        self.fc1 = nn.Linear(channels, hidden)
        self.fc2 = nn.Linear(hidden, channels)

    def forward(self, x):
        s = x.mean(dim=(2, 3))
        s = torch.sigmoid(self.fc2(torch.relu(self.fc1(s))))
        return x * s[:, :, None, None]


class ConvBlock(nn.Module):
    """Conv-BN-LeakyReLU-Conv-BN feature extractor."""

    def __init__(self, c_in: int, c_out: int, slope: float):
        super().__init__()
        self.net = nn.Sequential(
            nn.Conv2d(c_in, c_out, 3, padding=1),
            nn.BatchNorm2d(c_out),
            nn.LeakyReLU(slope),
            nn.Conv2d(c_out, c_out, 3, padding=1),
            nn.BatchNorm2d(c_out),
        )

    def forward(self, x):
        return self.net(x)


class SEResConv(nn.Module):
    """Residual conv block gated by SE; a 1x1 projection matches shapes."""

    def __init__(self, c_in: int, c_out: int, reduction: int, slope: float):
        super().__init__()
        self.conv = ConvBlock(c_in, c_out, slope)
        self.se = SEBlock(c_out, reduction)
        self.act = nn.LeakyReLU(slope)
        self.proj = nn.Identity() if c_in == c_out else nn.Conv2d(c_in, c_out, 1)

    def forward(self, x):
        return self.act(self.se(self.conv(x))) + self.proj(x)


class EncoderStage(nn.Module):
    """SE-Res Conv followed by a stride-2 convolution instead of pooling."""

    def __init__(self, c_in: int, c_out: int, reduction: int, slope: float):
        super().__init__()
        self.block = SEResConv(c_in, c_out, reduction, slope)
        self.down = nn.Sequential(
            nn.Conv2d(c_out, c_out, 3, stride=2, padding=1),
            nn.BatchNorm2d(c_out),
            nn.LeakyReLU(slope),
        )

    def forward(self, x):
        return self.down(self.block(x))


class DecoderStage(nn.Module):
    """SE-Res Conv on the (optionally skip-concatenated) input, a second
    SE gate on the block output, then nearest-neighbor x2 up-sampling.

    The pre-upsample features feed the side-output head.
    """

    def __init__(self, c_in: int, c_out: int, reduction: int, slope: float,
                 upsample: bool = True, side: bool = True):
        super().__init__()
        self.block = SEResConv(c_in, c_out, reduction, slope)
        self.se = SEBlock(c_out, reduction)
        self.up = nn.Upsample(scale_factor=2, mode="nearest") if upsample else nn.Identity()
        self.side_head = nn.Conv2d(c_out, 1, 1) if side else None

    def forward(self, x):
        y = self.se(self.block(x))
        side = torch.sigmoid(self.side_head(y)) if self.side_head is not None else None
        return self.up(y), side


class RegionNet(nn.Module):
    def __init__(self, config: NetworkConfig):
        super().__init__()
        self.config = config
        c = config.base_channels
        r, s = config.se_reduction, config.leaky_slope
        # Encoder outputs: (H/2, c), (H/4, 2c), (H/8, 4c), (H/16, 8c).
        self.enc = nn.ModuleList(
            [
                EncoderStage(3, c, r, s),
                EncoderStage(c, 2 * c, r, s),
                EncoderStage(2 * c, 4 * c, r, s),
                EncoderStage(4 * c, 8 * c, r, s),
            ]
        )
        # Decoder: the deepest stage works on the encoder output directly;
        # the next three concatenate the mirrored encoder features. Side
        # outputs come out at H/16, H/8, H/4, H/2.
        self.dec = nn.ModuleList(
            [
                DecoderStage(8 * c, 8 * c, r, s),
                DecoderStage(8 * c + 4 * c, 4 * c, r, s),
                DecoderStage(4 * c + 2 * c, 2 * c, r, s),
                DecoderStage(2 * c + c, c, r, s),
                DecoderStage(c, c, r, s, upsample=False, side=False),
            ]
        )
        self.head = nn.Conv2d(c, 1, 1)

    def forward(self, x) -> tuple[torch.Tensor, tuple[torch.Tensor, ...]]:
        """Returns (main output, side outputs ordered halving first).

        Main output: (B, 1, H, W). Side outputs: (B, 1, H/2, W/2) through
        (B, 1, H/16, W/16), matching the deep-supervision level order.
        """
        skips = []
        y = x
        for stage in self.enc:
            y = stage(y)
            skips.append(y)

        sides = []
        y, side = self.dec[0](skips[3])
        sides.append(side)
        for stage, skip in zip(self.dec[1:4], (skips[2], skips[1], skips[0])):
            y, side = stage(torch.cat([y, skip], dim=1))
            sides.append(side)
        y, _ = self.dec[4](y)
        main = torch.sigmoid(self.head(y))
        # sides were collected deepest first (H/16 ... H/2); level order is
        # shallowest first.
        return main, tuple(reversed(sides))


def build_network(config: NetworkConfig) -> RegionNet:
    return RegionNet(config)
