"""Procedural narrow-passage environments, solvable instances, reference
optimal paths via A* + shortcut smoothing, and dataset assembly."""

from __future__ import annotations

import hashlib
import heapq
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grid import GridMap, Point, RegionMask, save_map, save_mask, segment_free
from .planner import PlanInstance
from .region import default_dilation_radius, oracle_region, threshold_region

SQRT2 = math.sqrt(2.0)


class UnsolvableError(RuntimeError):
    """No collision-free path exists between the endpoints."""


class GenerationError(RuntimeError):
    """Retry budget exhausted while generating a solvable instance."""


@dataclass(frozen=True)
class GenParams:
    size: int = 64
    n_rect: tuple[int, int] = (6, 12)
    rect_extent: tuple[int, int] = (8, 48)
    n_walls: tuple[int, int] = (1, 3)
    gap_width: tuple[int, int] = (3, 8)
    seed: int = 0

    def __post_init__(self):
        if self.size < 32 or self.size & (self.size - 1):
            raise ValueError("size must be a power of two >= 32")
        if self.gap_width[0] < 3:
            raise ValueError("gap_width minimum must be >= 3")

    @classmethod
    def narrow(cls, size: int = 64, seed: int = 0) -> "GenParams":
        """Preset biased toward hard narrow-passage scenarios: more walls,
        the tightest admissible gaps, smaller clutter rectangles."""
        s = size / 64.0
        return cls(
            size=size,
            n_rect=(4, 8),
            rect_extent=(max(2, round(6 * s)), max(3, round(20 * s))),
            n_walls=(2, 4),
            gap_width=(max(3, round(3 * s)), max(4, round(4 * s))),
            seed=seed,
        )

    @classmethod
    def for_size(cls, size: int, seed: int = 0) -> "GenParams":
        """Scale the 64-px defaults to another map side."""
        s = size / 64.0
        return cls(
            size=size,
            n_rect=(6, 12),
            rect_extent=(max(2, round(8 * s)), max(3, round(48 * s))),
            n_walls=(1, 3),
            gap_width=(max(3, round(3 * s)), max(4, round(8 * s))),
            seed=seed,
        )


def generate_map(params: GenParams, rng: np.random.Generator) -> GridMap:
    """Random rectangles plus full-span walls pierced by narrow gaps.

    The border is always obstacle; gaps are carved last so each wall keeps
    at least one open passage.
    """
    size = params.size
    cells = np.zeros((size, size), dtype=bool)
    cells[0, :] = cells[-1, :] = cells[:, 0] = cells[:, -1] = True

    n_walls = int(rng.integers(params.n_walls[0], params.n_walls[1] + 1))
    walls = []
    for _ in range(n_walls):
        horizontal = bool(rng.integers(2))
        pos = int(rng.integers(4, size - 5))
        thickness = 2
        if horizontal:
            cells[pos : pos + thickness, :] = True
        else:
            cells[:, pos : pos + thickness] = True
        walls.append((horizontal, pos, thickness))

    n_rect = int(rng.integers(params.n_rect[0], params.n_rect[1] + 1))
    for _ in range(n_rect):
        w = int(rng.integers(params.rect_extent[0], params.rect_extent[1] + 1))
        h = int(rng.integers(params.rect_extent[0], params.rect_extent[1] + 1))
        x = int(rng.integers(1, max(2, size - w)))
        y = int(rng.integers(1, max(2, size - h)))
        cells[y : y + h, x : x + w] = True

    # Carve gaps last so neither rectangles nor crossing walls seal them.
    for horizontal, pos, thickness in walls:
        n_gaps = int(rng.integers(1, 3))
        for _ in range(n_gaps):
            g = int(rng.integers(params.gap_width[0], params.gap_width[1] + 1))
            at = int(rng.integers(1, size - 1 - g))
            if horizontal:
                cells[pos : pos + thickness, at : at + g] = False
            else:
                cells[at : at + g, pos : pos + thickness] = False

    return GridMap(cells)


def _free_cell_centers(grid: GridMap) -> np.ndarray:
    rows, cols = np.nonzero(~grid.cells)
    return np.stack([cols + 0.5, rows + 0.5], axis=1)


def generate_instance(
    grid: GridMap,
    rng: np.random.Generator,
    min_separation: float,
    goal_tolerance: float | None = None,
    max_tries: int = 200,
) -> PlanInstance:
    """Draw a solvable start/goal pair with the required separation."""
    centers = _free_cell_centers(grid)
    if len(centers) < 2:
        raise GenerationError("map has fewer than 2 free cells")
    if goal_tolerance is None:
        goal_tolerance = 0.02 * max(grid.width, grid.height)
    for _ in range(max_tries):
        i, j = rng.integers(len(centers), size=2)
        if i == j:
            continue
        start = Point(*centers[i])
        goal = Point(*centers[j])
        if math.hypot(goal.x - start.x, goal.y - start.y) < min_separation:
            continue
        try:
            reference_path(grid, start, goal)
        except UnsolvableError:
            continue
        return PlanInstance(map=grid, start=start, goal=goal, goal_tolerance=goal_tolerance)
    raise GenerationError(f"no solvable instance found in {max_tries} tries")


def _astar_cells(grid: GridMap, start_cell, goal_cell) -> list[tuple[int, int]]:
    """8-connected A* over free cells, as (col, row) pairs.

    Diagonal moves are forbidden when either orthogonal neighbor is
    blocked (no corner cutting).
    """
    cells = grid.cells
    h, w = cells.shape
    if cells[start_cell[1], start_cell[0]] or cells[goal_cell[1], goal_cell[0]]:
        raise UnsolvableError("endpoint cell is an obstacle")

    def heuristic(c):
        dx = abs(c[0] - goal_cell[0])
        dy = abs(c[1] - goal_cell[1])
        return (dx + dy) + (SQRT2 - 2.0) * min(dx, dy)

    g = {start_cell: 0.0}
    came = {start_cell: start_cell}
    open_heap = [(heuristic(start_cell), 0.0, start_cell)]
    closed = set()
    while open_heap:
        _, gc, cur = heapq.heappop(open_heap)
        if cur in closed:
            continue
        if cur == goal_cell:
            path = [cur]
            while came[cur] != cur:
                cur = came[cur]
                path.append(cur)
            return path[::-1]
        closed.add(cur)
        cx, cy = cur
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                if dx == 0 and dy == 0:
                    continue
                nx, ny = cx + dx, cy + dy
                if not (0 <= nx < w and 0 <= ny < h) or cells[ny, nx]:
                    continue
                if dx and dy and (cells[cy, nx] or cells[ny, cx]):
                    continue
                ng = gc + (SQRT2 if dx and dy else 1.0)
                nc = (nx, ny)
                if ng < g.get(nc, math.inf):
                    g[nc] = ng
                    came[nc] = cur
                    heapq.heappush(open_heap, (ng + heuristic(nc), ng, nc))
    raise UnsolvableError("A* exhausted the open set")


def _shortcut(grid: GridMap, pts: list[Point], resolution: float = 0.5) -> list[Point]:
    """Greedy farthest-reach shortcutting, repeated until stable."""
    while True:
        out = [pts[0]]
        i = 0
        while i < len(pts) - 1:
            j = len(pts) - 1
            while j > i + 1 and not segment_free(grid, pts[i], pts[j], resolution):
                j -= 1
            out.append(pts[j])
            i = j
        if len(out) == len(pts):
            return out
        pts = out


def path_length(pts) -> float:
    return sum(math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(pts, pts[1:]))


def reference_path(grid: GridMap, start: Point, goal: Point) -> tuple[list[Point], float]:
    """Deterministic reference optimum: 8-connected A* + shortcut smoothing."""
    start_cell = (int(start[0]), int(start[1]))
    goal_cell = (int(goal[0]), int(goal[1]))
    cells = _astar_cells(grid, start_cell, goal_cell)
    pts = [Point(*start)]
    pts += [Point(c + 0.5, r + 0.5) for c, r in cells[1:-1]]
    pts.append(Point(*goal))
    pts = _shortcut(grid, pts)
    return pts, path_length(pts)


def make_ground_truth(
    grid: GridMap, instance: PlanInstance, dilation_radius: float | None = None
) -> RegionMask:
    """Binary ground-truth region: dilated reference path, thresholded."""
    if dilation_radius is None:
        dilation_radius = default_dilation_radius(grid)
    pm = oracle_region(grid, instance.start, instance.goal, dilation_radius)
    return threshold_region(pm, 0.5)


def _record_id(index: int) -> str:
    return f"inst{index:05d}"


def _split_of(ids: list[str], split_ratio: tuple[int, int, int]) -> dict[str, str]:
    """Deterministic hash-ranked assignment with exact split counts."""
    total = sum(split_ratio)
    n = len(ids)
    n_train = round(n * split_ratio[0] / total)
    n_val = round(n * split_ratio[1] / total)
    ranked = sorted(ids, key=lambda s: hashlib.sha256(s.encode()).hexdigest())
    out = {}
    for rank, rid in enumerate(ranked):
        if rank < n_train:
            out[rid] = "train"
        elif rank < n_train + n_val:
            out[rid] = "val"
        else:
            out[rid] = "test"
    return out


def _record_seed(master_seed: int, index: int) -> int:
    digest = hashlib.sha256(f"{master_seed}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def build_dataset(
    n: int,
    params: GenParams,
    out_dir,
    split_ratio: tuple[int, int, int] = (8, 1, 1),
    min_separation: float | None = None,
    dilation_radius: float | None = None,
) -> Path:
    """Write n records (map, instance, ground-truth region) plus a manifest.

    Layout: out_dir/{maps,instances,regions}/<id>.{pgm,json,pgm} and
    out_dir/manifest.json. Deterministic for fixed (params, seed).
    """
    if n < 10:
        raise ValueError("dataset needs at least 10 records")
    out = Path(out_dir)
    for sub in ("maps", "instances", "regions"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    if min_separation is None:
        min_separation = 0.4 * params.size

    ids = [_record_id(i) for i in range(n)]
    splits = _split_of(ids, split_ratio)
    records = []
    for i, rid in enumerate(ids):
        rng = np.random.default_rng(_record_seed(params.seed, i))
        for _attempt in range(50):
            grid = generate_map(params, rng)
            try:
                instance = generate_instance(grid, rng, min_separation)
                break
            except GenerationError:
                continue
        else:
            raise GenerationError(f"record {rid}: no solvable map in 50 attempts")

        _, ref_cost = reference_path(grid, instance.start, instance.goal)
        gt = make_ground_truth(grid, instance, dilation_radius)

        map_path = out / "maps" / f"{rid}.pgm"
        region_path = out / "regions" / f"{rid}.pgm"
        inst_path = out / "instances" / f"{rid}.json"
        save_map(grid, map_path)
        save_mask(gt, region_path)
        manifest_entry = {
            "id": rid,
            "map": str(map_path.relative_to(out)),
            "start": [instance.start.x, instance.start.y],
            "goal": [instance.goal.x, instance.goal.y],
            "region": str(region_path.relative_to(out)),
            "reference_cost": ref_cost,
            "split": splits[rid],
        }
        # Paths inside the instance file are relative to the file itself.
        inst_record = dict(manifest_entry)
        del inst_record["id"], inst_record["split"]
        inst_record["map"] = f"../maps/{rid}.pgm"
        inst_record["region"] = f"../regions/{rid}.pgm"
        inst_path.write_text(json.dumps(inst_record, indent=2) + "\n")
        records.append(manifest_entry)

    manifest_path = out / "manifest.json"
    manifest_path.write_text(
        json.dumps({"size": params.size, "seed": params.seed, "records": records}, indent=2)
        + "\n"
    )
    return manifest_path
