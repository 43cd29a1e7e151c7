"""Benchmark harness: paired planner runs over a dataset, CSV statistics,
region metric evaluation, and raster rendering of trees and paths."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import losses
from .grid import Point, load_map
from .planner import PlanInstance, PlannerConfig, PlanResult, Tree, plan
from .region import (
    ProbabilityMap,
    RegionSampler,
    load_region,
    region_strategy,
)

CSV_SCHEMA_COMMENT = "# regionplan bench csv v1"
CSV_COLUMNS = (
    "instance",
    "method",
    "trial",
    "vertices_added",
    "samples_drawn",
    "rewire_count",
    "wall_time",
    "cost",
    "success",
)
METHODS = ("uniform", "oracle-region", "file-region")


@dataclass(frozen=True)
class BenchConfig:
    dataset: Path
    methods: tuple[str, ...] = ("uniform", "oracle-region")
    trials: int = 50
    max_samples: int = 5000
    termination_ratio: float = 1.03
    heuristic_bias: float = 0.8
    seed: int = 0
    region_dir: Path | None = None  # where <id>.region.pgm lives; default next to manifest

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.methods:
            raise ValueError("methods must be non-empty")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")


def trial_seed(seed: int, instance_id: str, method: str, trial: int) -> int:
    digest = hashlib.sha256(f"{seed}:{instance_id}:{method}:{trial}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def load_manifest(path) -> dict:
    path = Path(path)
    manifest = json.loads(path.read_text())
    manifest["_root"] = path.parent
    return manifest


def load_instance_record(record: dict, root: Path) -> tuple[PlanInstance, dict]:
    grid = load_map(root / record["map"])
    tol = record.get("goal_tolerance") or 0.02 * max(grid.width, grid.height)
    instance = PlanInstance(
        map=grid,
        start=Point(*record["start"]),
        goal=Point(*record["goal"]),
        goal_tolerance=tol,
    )
    return instance, record


def _method_sampler(method: str, record: dict, instance: PlanInstance,
                    config: BenchConfig, root: Path):
    if method == "uniform":
        return None
    if method == "oracle-region":
        if record.get("region"):
            region = load_region(root / record["region"],
                                 expected_shape=instance.map.cells.shape)
        else:
            from .region import default_dilation_radius, oracle_region

            region = oracle_region(instance.map, instance.start, instance.goal,
                                   default_dilation_radius(instance.map))
    else:  # file-region
        region_dir = config.region_dir or root
        region_path = Path(region_dir) / f"{record['id']}.region.pgm"
        if not region_path.exists():
            raise FileNotFoundError(f"file-region method needs {region_path}")
        region = load_region(region_path, expected_shape=instance.map.cells.shape)
    return region_strategy(RegionSampler(region), config.heuristic_bias)


def run_benchmark(config: BenchConfig, out_csv) -> Path:
    """One RunRow per (instance, method, trial), in deterministic order.

    Everything except the wall_time column is reproducible for a fixed
    seed.
    """
    manifest = load_manifest(config.dataset)
    root = manifest["_root"]
    out_csv = Path(out_csv)
    with open(out_csv, "w", newline="") as f:
        f.write(CSV_SCHEMA_COMMENT + "\n")
        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        for record in manifest["records"]:
            instance, record = load_instance_record(record, root)
            for method in config.methods:
                sampler = _method_sampler(method, record, instance, config, root)
                for trial in range(config.trials):
                    pc = PlannerConfig.for_map(
                        instance.map,
                        heuristic_bias=0.0 if method == "uniform" else config.heuristic_bias,
                        max_samples=config.max_samples,
                        termination_ratio=config.termination_ratio,
                        reference_cost=record.get("reference_cost"),
                        rng_seed=trial_seed(config.seed, record["id"], method, trial),
                    )
                    result, _ = plan(instance, pc, sampler)
                    writer.writerow(
                        [
                            record["id"],
                            method,
                            trial,
                            result.vertices_added,
                            result.samples_drawn,
                            result.rewire_count,
                            f"{result.wall_time:.6f}",
                            "" if result.cost is None else f"{result.cost:.9f}",
                            result.terminated_by == "converged",
                        ]
                    )
    return out_csv


def read_rows(csv_path) -> list[dict]:
    rows = []
    with open(csv_path, newline="") as f:
        lines = (ln for ln in f if not ln.startswith("#"))
        for row in csv.DictReader(lines):
            row["vertices_added"] = int(row["vertices_added"])
            row["samples_drawn"] = int(row["samples_drawn"])
            row["rewire_count"] = int(row["rewire_count"])
            row["wall_time"] = float(row["wall_time"])
            row["cost"] = float(row["cost"]) if row["cost"] else None
            row["success"] = row["success"] == "True"
            rows.append(row)
    if not rows:
        raise ValueError(f"{csv_path}: no data rows")
    return rows


def summarize(csv_path) -> list[dict]:
    """Per-(instance, method) means, medians, success rate, and the
    method-over-uniform ratios when uniform rows are present."""
    rows = read_rows(csv_path)
    groups: dict[tuple[str, str], list[dict]] = {}
    for row in rows:
        groups.setdefault((row["instance"], row["method"]), []).append(row)

    summary = []
    for (instance, method), g in sorted(groups.items()):
        summary.append(
            {
                "instance": instance,
                "method": method,
                "trials": len(g),
                "mean_vertices": statistics.mean(r["vertices_added"] for r in g),
                "median_vertices": statistics.median(r["vertices_added"] for r in g),
                "mean_wall_time": statistics.mean(r["wall_time"] for r in g),
                "median_wall_time": statistics.median(r["wall_time"] for r in g),
                "success_rate": statistics.mean(1.0 if r["success"] else 0.0 for r in g),
            }
        )
    baselines = {s["instance"]: s for s in summary if s["method"] == "uniform"}
    for s in summary:
        base = baselines.get(s["instance"])
        if base is not None and base["mean_vertices"] > 0:
            s["vertices_ratio_vs_uniform"] = s["mean_vertices"] / base["mean_vertices"]
            s["time_ratio_vs_uniform"] = s["mean_wall_time"] / base["mean_wall_time"]
    return summary


def eval_region(pred: ProbabilityMap, gt: ProbabilityMap,
                config: losses.LossConfig = losses.LossConfig()) -> dict:
    """Metric record comparing a predicted region against ground truth."""
    gt_mask = (gt.cells >= 0.5).astype(np.float64)
    return {
        "dice": losses.dice_coefficient(pred.cells, gt_mask),
        "wbce": losses.weighted_bce(pred.cells, gt_mask, config),
        "purity_loss": losses.purity_loss(pred.cells, gt_mask),
        "hybrid": losses.hybrid_loss(pred.cells, [], gt_mask, config),
    }


# Fig. 1/7-style color conventions.
COLOR_FREE = (255, 255, 255)
COLOR_OBSTACLE = (0, 0, 0)
COLOR_REGION = (255, 200, 200)
COLOR_TREE = (150, 150, 150)
COLOR_PATH = (160, 10, 10)
COLOR_START = (255, 0, 0)
COLOR_GOAL = (0, 0, 255)


def _draw_segment(img: np.ndarray, a: Point, b: Point, color) -> None:
    h, w = img.shape[:2]
    length = math.hypot(b[0] - a[0], b[1] - a[1])
    n = max(1, math.ceil(length / 0.3))
    ts = np.linspace(0.0, 1.0, n + 1)
    xs = np.clip((a[0] + (b[0] - a[0]) * ts).astype(np.intp), 0, w - 1)
    ys = np.clip((a[1] + (b[1] - a[1]) * ts).astype(np.intp), 0, h - 1)
    img[ys, xs] = color


def _draw_disc(img: np.ndarray, p: Point, radius: int, color) -> None:
    h, w = img.shape[:2]
    cx, cy = int(p[0]), int(p[1])
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            if dx * dx + dy * dy <= radius * radius:
                x, y = cx + dx, cy + dy
                if 0 <= x < w and 0 <= y < h:
                    img[y, x] = color


def render(
    instance: PlanInstance,
    result: Optional[PlanResult],
    tree: Optional[Tree],
    region: Optional[ProbabilityMap],
    out_path,
) -> Path:
    """Rasterize map, region tint, tree edges, final path, and endpoints
    to a P6 PPM. Deterministic: same inputs give byte-identical files."""
    grid = instance.map
    img = np.empty((grid.height, grid.width, 3), dtype=np.uint8)
    img[:] = COLOR_FREE
    if region is not None:
        tint = region.cells >= 0.5
        img[tint] = COLOR_REGION
    img[grid.cells] = COLOR_OBSTACLE

    if tree is not None:
        for v in range(1, tree.n):
            _draw_segment(img, tree.point(tree.parent[v]), tree.point(v), COLOR_TREE)
    if result is not None and result.path:
        for a, b in zip(result.path, result.path[1:]):
            _draw_segment(img, a, b, COLOR_PATH)
    _draw_disc(img, instance.start, 2, COLOR_START)
    _draw_disc(img, instance.goal, 2, COLOR_GOAL)

    out_path = Path(out_path)
    with open(out_path, "wb") as f:
        f.write(b"P6\n%d %d\n255\n" % (grid.width, grid.height))
        f.write(np.ascontiguousarray(img).tobytes())
    return out_path
