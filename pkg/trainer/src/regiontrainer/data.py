"""Dataset loading: manifest records to input/target tensor pairs.

The input image follows the planner's rendering conventions: white free
space, black obstacles, a red disc at the start and a blue disc at the
goal, both radius 2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .pgmio import load_obstacles, load_probability

DISC_RADIUS = 2
SPLITS = ("train", "val", "test", "all")


@dataclass(frozen=True)
class Record:
    id: str
    obstacles: np.ndarray
    start: tuple[float, float]
    goal: tuple[float, float]
    target: np.ndarray  # ground-truth region, float in {0, 1}
    split: str


def _draw_disc(img: np.ndarray, x: float, y: float, color) -> None:
    h, w = img.shape[1:]
    cx, cy = int(x), int(y)
    for dy in range(-DISC_RADIUS, DISC_RADIUS + 1):
        for dx in range(-DISC_RADIUS, DISC_RADIUS + 1):
            if dx * dx + dy * dy <= DISC_RADIUS * DISC_RADIUS:
                px, py = cx + dx, cy + dy
                if 0 <= px < w and 0 <= py < h:
                    img[:, py, px] = color


def rasterize_input(obstacles: np.ndarray, start, goal) -> torch.Tensor:
    """3-channel float image in [0, 1]: map plus endpoint markers."""
    h, w = obstacles.shape
    if not (0 <= start[0] < w and 0 <= start[1] < h):
        raise ValueError(f"start {start} outside the {w}x{h} map")
    if not (0 <= goal[0] < w and 0 <= goal[1] < h):
        raise ValueError(f"goal {goal} outside the {w}x{h} map")
    img = np.ones((3, h, w), dtype=np.float32)
    img[:, obstacles] = 0.0
    _draw_disc(img, start[0], start[1], (1.0, 0.0, 0.0))
    _draw_disc(img, goal[0], goal[1], (0.0, 0.0, 1.0))
    return torch.from_numpy(img)


def load_records(manifest_path, split: str = "all") -> list[Record]:
    if split not in SPLITS:
        raise ValueError(f"unknown split {split!r}")
    manifest_path = Path(manifest_path)
    root = manifest_path.parent
    manifest = json.loads(manifest_path.read_text())
    records = []
    for entry in manifest["records"]:
        if split != "all" and entry["split"] != split:
            continue
        records.append(
            Record(
                id=entry["id"],
                obstacles=load_obstacles(root / entry["map"]),
                start=tuple(entry["start"]),
                goal=tuple(entry["goal"]),
                target=(load_probability(root / entry["region"]) >= 0.5).astype(np.float32),
                split=entry["split"],
            )
        )
    if not records:
        raise ValueError(f"{manifest_path}: split {split!r} is empty")
    return records


def to_tensors(records: list[Record]) -> tuple[torch.Tensor, torch.Tensor]:
    """Stack records into (inputs (N,3,H,W), targets (N,1,H,W))."""
    xs = torch.stack([rasterize_input(r.obstacles, r.start, r.goal) for r in records])
    ys = torch.stack([torch.from_numpy(r.target).unsqueeze(0) for r in records])
    return xs, ys
