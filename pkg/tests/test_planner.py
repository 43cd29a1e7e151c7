import math

import numpy as np
import pytest

from regionplan.grid import GridMap, Point, segment_free
from regionplan.planner import (
    PlanInstance,
    PlannerConfig,
    Tree,
    choose_parent,
    extract_path,
    near_radius,
    near_vertices,
    nearest,
    plan,
    rewire,
    steer,
    uniform_sample,
)
from regionplan.region import ProbabilityMap, RegionSampler, region_strategy


def check_tree_invariants(tree, grid, resolution=0.5, check_edges=True):
    assert tree.parent[0] == 0
    assert tree.cost[0] == 0.0
    for v in range(1, tree.n):
        p = tree.parent[v]
        assert p != v
        d = math.hypot(*(tree._pts[v] - tree._pts[p]))
        assert abs(tree.cost[v] - (tree.cost[p] + d)) <= 1e-9
        # acyclicity: climbing parents reaches the root within n steps
        u, hops = v, 0
        while u != 0:
            u = tree.parent[u]
            hops += 1
            assert hops <= tree.n
        if check_edges:
            assert segment_free(grid, tree.point(p), tree.point(v), resolution)


class TestSteer:
    def test_axis_aligned(self):
        assert steer(Point(0, 0), Point(10, 0), 5) == Point(5, 0)

    def test_within_step(self):
        assert steer(Point(0, 0), Point(3, 4), 10) == Point(3, 4)

    def test_scaled_direction(self):
        # unit vector (0.6, 0.8) scaled by 2.5
        p = steer(Point(0, 0), Point(3, 4), 2.5)
        assert p.x == pytest.approx(1.5) and p.y == pytest.approx(2.0)

    def test_same_point(self):
        assert steer(Point(2, 2), Point(2, 2), 1) == Point(2, 2)


class TestNearest:
    def test_single_vertex(self):
        tree = Tree(Point(3, 3))
        assert nearest(tree, Point(9, 9)) == 0

    def test_strict_minimum(self):
        tree = Tree(Point(0, 0))
        tree.add(Point(10, 0), 0, 10.0)
        assert nearest(tree, Point(4, 0)) == 0

    def test_matches_linear_scan(self):
        rng = np.random.default_rng(5)
        tree = Tree(Point(*rng.uniform(0, 64, 2)))
        for _ in range(199):
            p = Point(*rng.uniform(0, 64, 2))
            tree.add(p, 0, 1.0)
        for _ in range(50):
            q = np.asarray(rng.uniform(0, 64, 2))
            dists = [math.hypot(*(tree._pts[v] - q)) for v in range(tree.n)]
            assert nearest(tree, Point(*q)) == int(np.argmin(dists))


class TestNearRadius:
    def test_clamps_to_min_radius(self):
        cfg = PlannerConfig(step=1.0, near_gamma=1.0, min_radius=2.0)
        assert near_radius(10**9, cfg, 64 * 64) == 2.0

    def test_direct_evaluation(self):
        cfg = PlannerConfig(step=1.0, near_gamma=1.0, min_radius=0.0)
        expected = 64.0 * math.sqrt(math.log(2) / 2)
        assert near_radius(1, cfg, 64 * 64) == pytest.approx(expected)

    def test_non_increasing(self):
        cfg = PlannerConfig(step=1.0, min_radius=0.0)
        for n in [8, 32, 128, 1024]:
            assert near_radius(n, cfg, 4096) >= near_radius(4 * n, cfg, 4096)


class TestUniformSample:
    def test_seeded_determinism(self, empty64):
        a = [uniform_sample(empty64, np.random.default_rng(3)) for _ in range(5)]
        b = [uniform_sample(empty64, np.random.default_rng(3)) for _ in range(5)]
        assert a[0] == b[0]
        rng1, rng2 = np.random.default_rng(3), np.random.default_rng(3)
        seq1 = [uniform_sample(empty64, rng1) for _ in range(10)]
        seq2 = [uniform_sample(empty64, rng2) for _ in range(10)]
        assert seq1 == seq2

    def test_in_bounds(self, empty64):
        rng = np.random.default_rng(0)
        for _ in range(100):
            p = uniform_sample(empty64, rng)
            assert 0 <= p.x < 64 and 0 <= p.y < 64

    def test_quadrant_counts(self, empty64):
        rng = np.random.default_rng(42)
        pts = np.array([uniform_sample(empty64, rng) for _ in range(100_000)])
        counts = [
            ((pts[:, 0] < 32) & (pts[:, 1] < 32)).sum(),
            ((pts[:, 0] >= 32) & (pts[:, 1] < 32)).sum(),
            ((pts[:, 0] < 32) & (pts[:, 1] >= 32)).sum(),
            ((pts[:, 0] >= 32) & (pts[:, 1] >= 32)).sum(),
        ]
        sigma = math.sqrt(100_000 * 0.25 * 0.75)
        for c in counts:
            assert abs(c - 25_000) < 4 * sigma


class TestChooseParent:
    def test_root_only(self, empty64):
        tree = Tree(Point(5, 5))
        q = Point(8, 9)
        parent, cost = choose_parent(tree, q, [0], empty64, 0.5)
        assert parent == 0
        assert cost == pytest.approx(5.0)

    def test_forced_arithmetic(self, empty64):
        tree = Tree(Point(0, 0))
        a = tree.add(Point(10, 0), 0, 10.0)
        b = tree.add(Point(14, 0), 0, 14.0)
        tree.cost[a], tree.cost[b] = 10.0, 12.0
        q = Point(14, 2)  # a: 10 + sqrt(20); b: 12 + 2 = 14 wins
        parent, cost = choose_parent(tree, q, [a, b], empty64, 0.5)
        assert parent == b
        assert cost == pytest.approx(14.0)

    def test_no_free_connection(self):
        cells = np.zeros((16, 16), dtype=bool)
        cells[:, 8] = True
        grid = GridMap(cells)
        tree = Tree(Point(2, 2))
        assert choose_parent(tree, Point(14, 2), [0], grid, 0.5) is None

    def test_matches_brute_force(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            grid = GridMap(rng.random((32, 32)) < 0.15)
            tree = Tree(Point(*rng.uniform(0, 32, 2)))
            for _ in range(19):
                tree.add(Point(*rng.uniform(0, 32, 2)), 0, float(rng.uniform(0, 40)))
            q = Point(*rng.uniform(0, 32, 2))
            near = list(range(tree.n))
            # brute force: exhaustive evaluation over all near vertices
            best = None
            for v in near:
                if not segment_free(grid, tree.point(v), q, 0.5):
                    continue
                c = tree.cost[v] + math.hypot(*(tree._pts[v] - np.asarray(q)))
                if best is None or c < best[1]:
                    best = (v, c)
            got = choose_parent(tree, q, near, grid, 0.5)
            if best is None:
                assert got is None
            else:
                assert got[0] == best[0]
                assert got[1] == pytest.approx(best[1], abs=1e-12)


class TestRewire:
    def test_no_improvement(self, empty64):
        tree = Tree(Point(0, 0))
        a = tree.add(Point(5, 0), 0, 5.0)
        v = tree.add(Point(0, 5), 0, 5.0)
        before = tree.cost[: tree.n].copy()
        assert rewire(tree, v, [0, a], empty64, 0.5) == 0
        assert (tree.cost[: tree.n] == before).all()
        assert tree.parent == [0, 0, 0]

    def test_chain_shortcut(self, empty64):
        # root -> A -> B costs 14; the diagonal root -> v_new -> B costs ~9.9.
        tree = Tree(Point(0, 0))
        a = tree.add(Point(0, 7), 0, 7.0)
        b = tree.add(Point(7, 7), a, 14.0)
        v = tree.add(Point(5, 5), 0, math.hypot(5, 5))
        assert rewire(tree, v, [a, b], empty64, 0.5) == 1
        assert tree.parent[b] == v
        assert tree.cost[b] == pytest.approx(math.hypot(5, 5) + math.hypot(2, 2))
        assert tree.parent[a] == 0  # A itself is cheaper via the root
        check_tree_invariants(tree, empty64)

    def test_subtree_costs_propagate(self, empty64):
        tree = Tree(Point(0, 0))
        a = tree.add(Point(0, 8), 0, 8.0)
        b = tree.add(Point(8, 8), a, 16.0)
        c = tree.add(Point(8, 12), b, 20.0)
        v = tree.add(Point(4, 4), 0, math.hypot(4, 4))
        assert rewire(tree, v, [b], empty64, 0.5) == 1
        new_b = 2 * math.hypot(4, 4)
        assert tree.cost[b] == pytest.approx(new_b)
        assert tree.cost[c] == pytest.approx(new_b + 4.0)
        check_tree_invariants(tree, empty64)

    def test_costs_never_increase(self, empty64):
        rng = np.random.default_rng(23)
        tree = Tree(Point(32, 32))
        for _ in range(40):
            q = Point(*rng.uniform(0, 64, 2))
            near = near_vertices(tree, q, 12.0)
            if len(near) == 0:
                continue
            got = choose_parent(tree, q, near, empty64, 0.5)
            if got is None:
                continue
            v = tree.add(q, got[0], got[1])
            before = tree.cost[: tree.n].copy()
            rewire(tree, v, near, empty64, 0.5)
            assert (tree.cost[: tree.n] <= before + 1e-12).all()
            check_tree_invariants(tree, empty64)


class TestExtractPath:
    def test_no_vertex_near_goal(self, empty64):
        tree = Tree(Point(5, 5))
        inst = PlanInstance(empty64, Point(5, 5), Point(60, 60), 1.0)
        assert extract_path(tree, inst) is None

    def test_root_within_tolerance(self, empty64):
        tree = Tree(Point(5, 5))
        inst = PlanInstance(empty64, Point(5, 5), Point(5.5, 5.0), 1.0)
        assert extract_path(tree, inst) == [Point(5, 5)]

    def test_cost_equals_segment_sum(self, empty64):
        inst = PlanInstance(empty64, Point(5, 5), Point(58, 58), 1.28)
        cfg = PlannerConfig.for_map(empty64, rng_seed=2, max_samples=800)
        result, tree = plan(inst, cfg)
        assert result.path is not None
        total = sum(
            math.hypot(b.x - a.x, b.y - a.y)
            for a, b in zip(result.path, result.path[1:])
        )
        assert result.cost == pytest.approx(total, abs=1e-9)


class TestPlan:
    def test_empty_map_converges(self, empty64):
        ref = math.hypot(53, 53)
        inst = PlanInstance(empty64, Point(5, 5), Point(58, 58), 1.28)
        cfg = PlannerConfig.for_map(empty64, reference_cost=ref, rng_seed=0)
        result, _ = plan(inst, cfg)
        assert result.terminated_by == "converged"
        assert result.cost <= 1.03 * ref

    def test_sealed_goal(self):
        cells = np.zeros((64, 64), dtype=bool)
        cells[30:41, 30:41] = True
        cells[32:39, 32:39] = False  # free pocket sealed inside the box
        grid = GridMap(cells)
        inst = PlanInstance(grid, Point(5, 5), Point(35, 35), 1.0)
        cfg = PlannerConfig.for_map(grid, rng_seed=1, max_samples=500)
        result, _ = plan(inst, cfg)
        assert result.path is None
        assert result.terminated_by == "sample_budget"

    def test_zero_bias_identical_to_uniform(self, empty64):
        region = ProbabilityMap(np.ones((64, 64)))
        strat = region_strategy(RegionSampler(region), b_h=0.0)
        inst = PlanInstance(empty64, Point(5, 5), Point(58, 58), 1.28)
        cfg = PlannerConfig.for_map(empty64, rng_seed=12, max_samples=400)
        r_uniform, t_uniform = plan(inst, cfg)
        r_biased, t_biased = plan(inst, cfg, strat)
        assert r_uniform.samples_drawn == r_biased.samples_drawn
        assert r_uniform.vertices_added == r_biased.vertices_added
        assert r_uniform.rewire_count == r_biased.rewire_count
        assert (t_uniform.points == t_biased.points).all()

    def test_deterministic_replay(self, empty64):
        inst = PlanInstance(empty64, Point(5, 5), Point(58, 58), 1.28)
        cfg = PlannerConfig.for_map(empty64, rng_seed=77, max_samples=500)
        r1, t1 = plan(inst, cfg)
        r2, t2 = plan(inst, cfg)
        assert r1.cost == r2.cost
        assert r1.samples_drawn == r2.samples_drawn
        assert (t1.points == t2.points).all()

    def test_counters_ordered(self, empty64):
        inst = PlanInstance(empty64, Point(5, 5), Point(58, 58), 1.28)
        cfg = PlannerConfig.for_map(empty64, rng_seed=4, max_samples=300)
        result, _ = plan(inst, cfg)
        assert result.vertices_added <= result.samples_drawn <= 300

    def test_invalid_instance(self):
        cells = np.zeros((64, 64), dtype=bool)
        cells[5, 5] = True
        grid = GridMap(cells)
        inst = PlanInstance(grid, Point(5.5, 5.5), Point(50, 50), 1.0)
        with pytest.raises(ValueError):
            plan(inst, PlannerConfig.for_map(grid))

    def test_best_cost_non_increasing(self, empty64):
        inst = PlanInstance(empty64, Point(5, 5), Point(58, 58), 1.28)
        history = []
        cfg = PlannerConfig.for_map(empty64, rng_seed=9, max_samples=600)
        plan(inst, cfg, iteration_hook=lambda tree, best: history.append(best))
        assert all(b <= a + 1e-12 for a, b in zip(history, history[1:]))
