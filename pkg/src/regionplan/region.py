"""Promising-region probability maps, the biased heuristic sampler, and
the oracle region built by dilating a reference optimal path."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import (
    GridMap,
    MapDimensionError,
    Point,
    RegionMask,
    _read_pgm_raw,
    _write_pgm_raw,
    dilate,
)
from .planner import uniform_sample


class RegionExhaustedError(RuntimeError):
    """No cell meets the sampling threshold; caller falls back to uniform."""


@dataclass(frozen=True)
class ProbabilityMap:
    """Per-pixel likelihood of lying in the promising region."""

    cells: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.float64)
        if cells.ndim != 2:
            raise MapDimensionError("probability map must be 2-D")
        if (cells < 0).any() or (cells > 1).any():
            raise ValueError("probabilities must lie in [0, 1]")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]


def threshold_region(pm: ProbabilityMap, threshold: float) -> RegionMask:
    if not 0 <= threshold <= 1:
        raise ValueError("threshold must be in [0, 1]")
    return RegionMask((pm.cells >= threshold).astype(np.uint8))


class RegionSampler:
    """Uniform sampler over the cells whose probability meets a threshold.

    Immutable after construction; the index of admissible cells is
    precomputed once.
    """

    def __init__(self, region: ProbabilityMap, threshold: float = 0.5):
        self.region = region
        self.threshold = threshold
        rows, cols = np.nonzero(region.cells >= threshold)
        self.index = np.stack([cols, rows], axis=1)  # (x, y) cell corners

    def __len__(self) -> int:
        return len(self.index)


def heuristic_sample(sampler: RegionSampler, rng: np.random.Generator) -> Point:
    """Uniform cell from the index, then a uniform point inside that cell."""
    if len(sampler.index) == 0:
        raise RegionExhaustedError("no cell meets the sampling threshold")
    cx, cy = sampler.index[rng.integers(len(sampler.index))]
    return Point(cx + rng.random(), cy + rng.random())


def mixed_sample(
    sampler: RegionSampler,
    grid: GridMap,
    b_h: float,
    rng: np.random.Generator,
) -> Point:
    """Heuristic sample with probability b_h, uniform otherwise.

    With b_h = 0 no bias draw is made, so the stream matches plain uniform
    sampling bit for bit. An exhausted region falls back to uniform.
    """
    if not 0 <= b_h <= 1:
        raise ValueError("b_h must be in [0, 1]")
    if b_h > 0 and rng.random() < b_h:
        try:
            return heuristic_sample(sampler, rng)
        except RegionExhaustedError:
            pass
    return uniform_sample(grid, rng)


def region_strategy(sampler: RegionSampler, b_h: float):
    """Bind a RegionSampler into the planner's sampler-callable signature."""

    def sample(grid: GridMap, rng: np.random.Generator) -> Point:
        return mixed_sample(sampler, grid, b_h, rng)

    return sample


def rasterize_polyline(points, width: int, height: int, spacing: float = 0.5) -> RegionMask:
    """Cells visited by the polyline's segments, sampled at `spacing`."""
    cells = np.zeros((height, width), dtype=np.uint8)
    for a, b in zip(points, points[1:]):
        length = math.hypot(b[0] - a[0], b[1] - a[1])
        n = max(1, math.ceil(length / spacing))
        ts = np.linspace(0.0, 1.0, n + 1)
        xs = np.clip((a[0] + (b[0] - a[0]) * ts).astype(np.intp), 0, width - 1)
        ys = np.clip((a[1] + (b[1] - a[1]) * ts).astype(np.intp), 0, height - 1)
        cells[ys, xs] = 1
    if len(points) == 1:
        x, y = points[0]
        cells[min(int(y), height - 1), min(int(x), width - 1)] = 1
    return RegionMask(cells)


def default_dilation_radius(grid: GridMap) -> int:
    """5% of the larger map side (13 px at 256)."""
    return max(1, round(0.05 * max(grid.width, grid.height)))


def oracle_region(
    grid: GridMap, start: Point, goal: Point, dilation_radius: float
) -> ProbabilityMap:
    """Ground-truth region: the reference optimal path dilated outward."""
    from .datagen import reference_path  # local import breaks the module cycle

    path, _ = reference_path(grid, start, goal)
    mask = rasterize_polyline(path, grid.width, grid.height)
    mask = dilate(mask, dilation_radius)
    return ProbabilityMap(mask.cells.astype(np.float64))


def load_region(path, expected_shape: tuple[int, int] | None = None) -> ProbabilityMap:
    """Read a probability map from P5 PGM; p = pixel / 255.

    `expected_shape` is (height, width) of the instance map, when known.
    """
    pixels = _read_pgm_raw(path)
    if expected_shape is not None and pixels.shape != tuple(expected_shape):
        raise MapDimensionError(
            f"{path}: region is {pixels.shape[1]}x{pixels.shape[0]}, "
            f"map is {expected_shape[1]}x{expected_shape[0]}"
        )
    return ProbabilityMap(pixels.astype(np.float64) / 255.0)


def save_region(pm: ProbabilityMap, path) -> None:
    """Write a probability map as P5 PGM; pixel = round(255 p)."""
    _write_pgm_raw(np.rint(pm.cells * 255.0).astype(np.uint8), path)
