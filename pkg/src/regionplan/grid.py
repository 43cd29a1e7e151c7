"""2-D occupancy grids, binary region masks, and netpbm raster I/O.

Coordinate convention used everywhere in this package: x = column,
y = row, origin at the top-left corner, 1 map unit = 1 pixel edge.
A point (x, y) lies in cell (row=floor(y), col=floor(x)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import ndimage


class MapFormatError(ValueError):
    """Raised for a malformed netpbm header or unsupported magic number."""


class MapDimensionError(ValueError):
    """Raised when a raster's dimensions violate the grid contract."""


class MapTruncatedError(ValueError):
    """Raised when a raster payload is shorter than the header promises."""


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class GridMap:
    """Occupancy grid; ``cells[row, col]`` is True for obstacle cells.

    Immutable after construction; safe to share across workers.
    """

    cells: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=bool)
        if cells.ndim != 2:
            raise MapDimensionError("occupancy grid must be 2-D")
        if cells.shape[0] < 8 or cells.shape[1] < 8:
            raise MapDimensionError(
                f"grid must be at least 8x8, got {cells.shape[1]}x{cells.shape[0]}"
            )
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]


@dataclass(frozen=True)
class RegionMask:
    """Binary label raster; ``cells[row, col]`` is 1 inside the region."""

    cells: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells)
        if cells.ndim != 2:
            raise MapDimensionError("region mask must be 2-D")
        if not np.isin(cells, (0, 1)).all():
            raise ValueError("region mask cells must be 0 or 1")
        cells = cells.astype(np.uint8)
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]


def _read_pgm_raw(path) -> np.ndarray:
    """Parse a binary-greyscale PGM (P5, maxval 255) into a uint8 array."""
    with open(path, "rb") as f:
        data = f.read()

    # Header: magic, width, height, maxval, separated by whitespace with
    # optional '#' comments; a single whitespace byte ends the header.
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            nl = data.find(b"\n", pos)
            if nl < 0:
                raise MapFormatError(f"{path}: unterminated comment in header")
            pos = nl + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise MapFormatError(f"{path}: truncated header")
        tokens.append(data[start:pos])
    pos += 1  # single whitespace byte after maxval

    if tokens[0] != b"P5":
        raise MapFormatError(f"{path}: expected P5 magic, got {tokens[0]!r}")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as e:
        raise MapFormatError(f"{path}: non-numeric header field") from e
    if maxval != 255:
        raise MapFormatError(f"{path}: expected maxval 255, got {maxval}")
    if width <= 0 or height <= 0:
        raise MapFormatError(f"{path}: bad dimensions {width}x{height}")

    payload = data[pos : pos + width * height]
    if len(payload) < width * height:
        raise MapTruncatedError(
            f"{path}: payload has {len(payload)} bytes, need {width * height}"
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width)


def _write_pgm_raw(pixels: np.ndarray, path) -> None:
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    height, width = pixels.shape
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (width, height))
        f.write(pixels.tobytes())


def load_map(path) -> GridMap:
    """Load an occupancy grid from a P5 PGM; pixels < 128 are obstacles."""
    pixels = _read_pgm_raw(path)
    return GridMap(pixels < 128)


def save_map(grid: GridMap, path) -> None:
    """Write an occupancy grid as P5 PGM; obstacles black, free white."""
    _write_pgm_raw(np.where(grid.cells, 0, 255), path)


def load_mask(path) -> RegionMask:
    """Load a binary region mask from a P5 PGM; pixels >= 128 are label 1."""
    pixels = _read_pgm_raw(path)
    return RegionMask((pixels >= 128).astype(np.uint8))


def save_mask(mask: RegionMask, path) -> None:
    _write_pgm_raw(np.where(mask.cells, 255, 0), path)


def is_free(grid: GridMap, p: Point) -> bool:
    """True iff p is in bounds and its containing cell is not an obstacle."""
    x, y = p
    if not (0 <= x < grid.width and 0 <= y < grid.height):
        return False
    return not grid.cells[int(y), int(x)]


def segment_free(grid: GridMap, a: Point, b: Point, resolution: float = 0.5) -> bool:
    """Collision check of segment ab by sampling at spacing <= resolution.

    Both endpoints are always among the samples.
    """
    if resolution <= 0:
        raise ValueError(f"resolution must be positive, got {resolution}")
    ax, ay = a
    bx, by = b
    length = math.hypot(bx - ax, by - ay)
    n = max(1, math.ceil(length / resolution))
    ts = np.linspace(0.0, 1.0, n + 1)
    xs = ax + (bx - ax) * ts
    ys = ay + (by - ay) * ts
    if (xs < 0).any() or (xs >= grid.width).any() or (ys < 0).any() or (ys >= grid.height).any():
        return False
    return not grid.cells[ys.astype(np.intp), xs.astype(np.intp)].any()


def _disk_footprint(radius: float) -> np.ndarray:
    r = int(math.floor(radius))
    dy, dx = np.mgrid[-r : r + 1, -r : r + 1]
    return (dx * dx + dy * dy) <= radius * radius + 1e-9


def dilate(mask: RegionMask, radius: float) -> RegionMask:
    """Set every cell within Euclidean distance <= radius of a positive cell."""
    if radius < 0:
        raise ValueError(f"radius must be non-negative, got {radius}")
    if radius == 0:
        return mask
    out = ndimage.binary_dilation(mask.cells.astype(bool), structure=_disk_footprint(radius))
    return RegionMask(out.astype(np.uint8))
