import json
import math

import numpy as np
import pytest

from regionplan.datagen import (
    GenParams,
    GenerationError,
    UnsolvableError,
    _astar_cells,
    build_dataset,
    generate_instance,
    generate_map,
    make_ground_truth,
    path_length,
    reference_path,
)
from regionplan.grid import GridMap, Point, load_map, load_mask

SQRT2 = math.sqrt(2)


def astar_cost(grid, start, goal):
    cells = _astar_cells(grid, (int(start[0]), int(start[1])), (int(goal[0]), int(goal[1])))
    return sum(
        SQRT2 if (a[0] != b[0] and a[1] != b[1]) else 1.0
        for a, b in zip(cells, cells[1:])
    )


class TestGenerateMap:
    def test_deterministic(self):
        params = GenParams.for_size(64, seed=5)
        m1 = generate_map(params, np.random.default_rng(5))
        m2 = generate_map(params, np.random.default_rng(5))
        assert (m1.cells == m2.cells).all()

    def test_border_only(self):
        params = GenParams(size=64, n_rect=(0, 0), n_walls=(0, 0))
        grid = generate_map(params, np.random.default_rng(0))
        assert grid.cells[0].all() and grid.cells[-1].all()
        assert grid.cells[:, 0].all() and grid.cells[:, -1].all()
        assert not grid.cells[1:-1, 1:-1].any()

    def test_gap_width_in_range(self):
        # one wall, no rectangles: scanline-measure the carved opening
        params = GenParams(size=64, n_rect=(0, 0), n_walls=(1, 1), gap_width=(3, 8))
        for seed in range(10):
            grid = generate_map(params, np.random.default_rng(seed))
            interior = grid.cells[1:-1, 1:-1]
            # wall rows/cols are mostly blocked; find runs of free cells there
            widths = []
            for axis in (0, 1):
                occupancy = interior.sum(axis=1 - axis)
                for i, occ in enumerate(occupancy):
                    if occ > interior.shape[1 - axis] // 2:
                        line = interior[i] if axis == 0 else interior[:, i]
                        run = 0
                        for blocked in line:
                            if not blocked:
                                run += 1
                            else:
                                if run:
                                    widths.append(run)
                                run = 0
                        if run:
                            widths.append(run)
            assert widths, "no gap found on the wall line"
            assert all(3 <= w <= 2 * 8 for w in widths)  # two gaps may merge

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            GenParams(size=48)
        with pytest.raises(ValueError):
            GenParams(size=64, gap_width=(2, 8))


class TestGenerateInstance:
    def test_postconditions(self):
        params = GenParams.for_size(64, seed=1)
        rng = np.random.default_rng(1)
        grid = generate_map(params, rng)
        inst = generate_instance(grid, rng, min_separation=0.5 * 64)
        assert math.hypot(inst.goal.x - inst.start.x, inst.goal.y - inst.start.y) >= 32
        reference_path(grid, inst.start, inst.goal)  # must not raise

    def test_two_free_cells_forced(self):
        cells = np.ones((8, 8), dtype=bool)
        cells[3, 3] = cells[3, 4] = False
        grid = GridMap(cells)
        inst = generate_instance(grid, np.random.default_rng(0), min_separation=0.5)
        assert {inst.start, inst.goal} == {Point(3.5, 3.5), Point(4.5, 3.5)}

    def test_all_solvable(self):
        params = GenParams.for_size(64, seed=2)
        rng = np.random.default_rng(2)
        grid = generate_map(params, rng)
        for _ in range(20):
            inst = generate_instance(grid, rng, min_separation=16)
            reference_path(grid, inst.start, inst.goal)

    def test_retry_exhaustion(self):
        # two free cells on opposite sides of a sealed wall: never solvable
        cells = np.ones((8, 8), dtype=bool)
        cells[1, 1] = cells[6, 6] = False
        grid = GridMap(cells)
        with pytest.raises(GenerationError):
            generate_instance(grid, np.random.default_rng(0), min_separation=1.0)


class TestReferencePath:
    def test_straight_free_line(self, empty16):
        path, cost = reference_path(empty16, Point(2, 2), Point(2, 12))
        assert cost == pytest.approx(10.0, abs=1e-6)

    def test_diagonal_smoothing(self, empty16):
        start, goal = Point(0.5, 0.5), Point(10.5, 10.5)
        path, cost = reference_path(empty16, start, goal)
        grid_cost = astar_cost(empty16, start, goal)
        assert grid_cost == pytest.approx(10 * SQRT2)
        assert cost <= grid_cost + 1e-9
        assert cost == pytest.approx(10 * SQRT2, rel=1e-6)

    def test_sealed_goal(self):
        cells = np.zeros((16, 16), dtype=bool)
        cells[7:10, :] = True
        grid = GridMap(cells)
        with pytest.raises(UnsolvableError):
            reference_path(grid, Point(3, 3), Point(3, 13))

    def test_bounds_vs_grid_and_euclidean(self):
        params = GenParams.for_size(64, seed=3)
        rng = np.random.default_rng(3)
        grid = generate_map(params, rng)
        for _ in range(5):
            inst = generate_instance(grid, rng, min_separation=20)
            path, cost = reference_path(grid, inst.start, inst.goal)
            euclid = math.hypot(inst.goal.x - inst.start.x, inst.goal.y - inst.start.y)
            assert euclid - 1e-9 <= cost <= astar_cost(grid, inst.start, inst.goal) + 1e-9
            assert cost == pytest.approx(path_length(path))


class TestMakeGroundTruth:
    def test_contains_endpoints_and_covers_path(self):
        params = GenParams.for_size(64, seed=4)
        rng = np.random.default_rng(4)
        grid = generate_map(params, rng)
        inst = generate_instance(grid, rng, min_separation=24)
        gt = make_ground_truth(grid, inst)
        assert gt.cells[int(inst.start.y), int(inst.start.x)] == 1
        assert gt.cells[int(inst.goal.y), int(inst.goal.x)] == 1

    def test_region_admits_in_region_path(self):
        # interpret region-and-free as the only free space; A* must succeed
        params = GenParams.for_size(64, seed=6)
        rng = np.random.default_rng(6)
        grid = generate_map(params, rng)
        inst = generate_instance(grid, rng, min_separation=24)
        gt = make_ground_truth(grid, inst)
        restricted = GridMap(grid.cells | (gt.cells == 0))
        reference_path(restricted, inst.start, inst.goal)

    def test_region_at_least_path_cells(self):
        from regionplan.region import rasterize_polyline

        grid = GridMap(np.zeros((32, 32), dtype=bool))
        inst_start, inst_goal = Point(3.5, 3.5), Point(28.5, 20.5)
        path, _ = reference_path(grid, inst_start, inst_goal)
        raster = rasterize_polyline(path, 32, 32)
        from regionplan.planner import PlanInstance

        inst = PlanInstance(grid, inst_start, inst_goal, 1.0)
        gt = make_ground_truth(grid, inst)
        assert gt.cells.sum() >= raster.cells.sum()
        assert (gt.cells >= raster.cells).all()


class TestBuildDataset:
    def test_split_counts_and_validity(self, tmp_path):
        params = GenParams.for_size(64, seed=9)
        manifest_path = build_dataset(10, params, tmp_path / "ds")
        manifest = json.loads(manifest_path.read_text())
        records = manifest["records"]
        assert len(records) == 10
        splits = [r["split"] for r in records]
        assert splits.count("train") == 8
        assert splits.count("val") == 1
        assert splits.count("test") == 1
        for r in records:
            grid = load_map(tmp_path / "ds" / r["map"])
            mask = load_mask(tmp_path / "ds" / r["region"])
            assert mask.cells.shape == grid.cells.shape
            path, cost = reference_path(grid, Point(*r["start"]), Point(*r["goal"]))
            assert cost == pytest.approx(r["reference_cost"])

    def test_rebuild_is_byte_identical(self, tmp_path):
        params = GenParams.for_size(64, seed=10)
        m1 = build_dataset(10, params, tmp_path / "a")
        m2 = build_dataset(10, params, tmp_path / "b")
        r1 = json.loads(m1.read_text())["records"]
        r2 = json.loads(m2.read_text())["records"]
        assert r1 == r2
        for rec in r1:
            a = (tmp_path / "a" / rec["map"]).read_bytes()
            b = (tmp_path / "b" / rec["map"]).read_bytes()
            assert a == b

    def test_too_few_records(self, tmp_path):
        with pytest.raises(ValueError):
            build_dataset(5, GenParams.for_size(64), tmp_path / "x")
