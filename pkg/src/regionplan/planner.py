"""RRT* with a pluggable sampling strategy.

The same planning loop runs plain uniform RRT* and region-guided search;
the only difference between methods is the sampler callable handed to
:func:`plan`.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .grid import GridMap, Point, is_free, segment_free

Sampler = Callable[[GridMap, np.random.Generator], Point]


@dataclass(frozen=True)
class PlanInstance:
    map: GridMap
    start: Point
    goal: Point
    goal_tolerance: float

    def validate(self) -> None:
        if not is_free(self.map, self.start):
            raise ValueError(f"start {self.start} is not in free space")
        if not is_free(self.map, self.goal):
            raise ValueError(f"goal {self.goal} is not in free space")
        if self.goal_tolerance <= 0:
            raise ValueError("goal_tolerance must be positive")


@dataclass(frozen=True)
class PlannerConfig:
    step: float
    heuristic_bias: float = 0.8
    max_samples: int = 5000
    near_gamma: float = 1.1
    min_radius: float | None = None  # None -> step
    rng_seed: int = 0
    resolution: float = 0.5
    termination_ratio: float = 1.03
    reference_cost: float | None = None

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be positive")
        if not 0 <= self.heuristic_bias <= 1:
            raise ValueError("heuristic_bias must be in [0, 1]")
        if self.max_samples < 1:
            raise ValueError("max_samples must be at least 1")
        if self.termination_ratio < 1:
            raise ValueError("termination_ratio must be >= 1")

    @classmethod
    def for_map(cls, grid: GridMap, **overrides) -> "PlannerConfig":
        """Defaults scaled to the map: step = 2% of the larger side."""
        step = 0.02 * max(grid.width, grid.height)
        return cls(step=overrides.pop("step", step), **overrides)


@dataclass
class PlanResult:
    path: Optional[list[Point]]
    cost: Optional[float]
    vertices_added: int
    samples_drawn: int
    rewire_count: int
    wall_time: float
    terminated_by: str  # "converged" or "sample_budget"


class Tree:
    """Exploration tree rooted at vertex 0; parent links and cost-to-come.

    Vertex coordinates live in a preallocated array so nearest / near
    queries are vectorized.
    """

    def __init__(self, root: Point, capacity: int = 1024):
        self._pts = np.empty((max(capacity, 16), 2))
        self._pts[0] = root
        self.n = 1
        self.parent = [0]
        self.cost = np.zeros(max(capacity, 16))
        self.children: list[list[int]] = [[]]

    @property
    def points(self) -> np.ndarray:
        return self._pts[: self.n]

    def point(self, v: int) -> Point:
        return Point(self._pts[v, 0], self._pts[v, 1])

    def add(self, p: Point, parent: int, cost: float) -> int:
        if self.n == len(self._pts):
            self._pts = np.concatenate([self._pts, np.empty_like(self._pts)])
            self.cost = np.concatenate([self.cost, np.empty_like(self.cost)])
        v = self.n
        self._pts[v] = p
        self.cost[v] = cost
        self.parent.append(parent)
        self.children.append([])
        self.children[parent].append(v)
        self.n += 1
        return v

    def reparent(self, v: int, new_parent: int, new_cost: float) -> None:
        """Move v under new_parent and propagate costs through v's subtree."""
        old = self.parent[v]
        self.children[old].remove(v)
        self.parent[v] = new_parent
        self.children[new_parent].append(v)
        delta = new_cost - self.cost[v]
        stack = [v]
        while stack:
            u = stack.pop()
            self.cost[u] += delta
            stack.extend(self.children[u])


def nearest(tree: Tree, q: Point) -> int:
    """Vertex minimizing Euclidean distance to q; ties go to the lowest id."""
    if tree.n == 0:
        raise ValueError("nearest on an empty tree")
    d = tree.points - np.asarray(q)
    return int(np.argmin(np.einsum("ij,ij->i", d, d)))


def near_vertices(tree: Tree, q: Point, radius: float) -> np.ndarray:
    d = tree.points - np.asarray(q)
    return np.flatnonzero(np.einsum("ij,ij->i", d, d) <= radius * radius)


def steer(a: Point, b: Point, step: float) -> Point:
    """Point at most `step` from a, along the direction from a to b."""
    if step <= 0:
        raise ValueError("step must be positive")
    d = math.hypot(b[0] - a[0], b[1] - a[1])
    if d <= step:
        return Point(b[0], b[1])
    t = step / d
    return Point(a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t)


def near_radius(n: int, config: PlannerConfig, map_area: float) -> float:
    """RRT* neighbor radius: the (log n / n)^(1/2) schedule for d = 2,

    scaled by a map-diagonal surrogate and clamped below by min_radius.
    """
    min_radius = config.min_radius if config.min_radius is not None else config.step
    r = config.near_gamma * math.sqrt(math.log(n + 1) / (n + 1)) * math.sqrt(map_area)
    return max(min_radius, r)


def uniform_sample(grid: GridMap, rng: np.random.Generator) -> Point:
    """Uniform over the continuous map extent; no obstacle rejection."""
    return Point(rng.uniform(0, grid.width), rng.uniform(0, grid.height))


def choose_parent(
    tree: Tree,
    q_new: Point,
    near: Sequence[int],
    grid: GridMap,
    resolution: float,
) -> Optional[tuple[int, float]]:
    """Best collision-free parent among `near` by cost-to-come through it.

    Ties break toward the lowest vertex id; None when no near vertex has a
    collision-free connection to q_new.
    """
    ids = np.asarray(sorted(int(i) for i in near))
    d = tree._pts[ids] - np.asarray(q_new)
    costs = tree.cost[ids] + np.sqrt(np.einsum("ij,ij->i", d, d))
    # Ascending (cost, id): the first collision-free candidate is the minimum.
    for k in np.lexsort((ids, costs)):
        v = int(ids[k])
        if segment_free(grid, tree.point(v), q_new, resolution):
            return v, float(costs[k])
    return None


def rewire(
    tree: Tree,
    v_new: int,
    near: Sequence[int],
    grid: GridMap,
    resolution: float,
) -> int:
    """Reparent near vertices through v_new when it lowers their cost."""
    count = 0
    p_new = tree.point(v_new)
    for v in near:
        v = int(v)
        if v == v_new or v == 0:
            continue
        c = tree.cost[v_new] + math.hypot(p_new[0] - tree._pts[v, 0], p_new[1] - tree._pts[v, 1])
        if c < tree.cost[v] and segment_free(grid, p_new, tree.point(v), resolution):
            tree.reparent(v, v_new, c)
            count += 1
    return count


def extract_path(tree: Tree, instance: PlanInstance) -> Optional[list[Point]]:
    """Root-to-goal polyline through the cheapest vertex near the goal."""
    d = tree.points - np.asarray(instance.goal)
    within = np.flatnonzero(np.einsum("ij,ij->i", d, d) <= instance.goal_tolerance**2)
    if len(within) == 0:
        return None
    v = int(within[np.argmin(tree.cost[within])])
    path = []
    while True:
        path.append(tree.point(v))
        if v == 0:
            break
        v = tree.parent[v]
    path.reverse()
    return path


def plan(
    instance: PlanInstance,
    config: PlannerConfig,
    sampler: Sampler | None = None,
    iteration_hook: Callable[[Tree, float], None] | None = None,
) -> tuple[PlanResult, Tree]:
    """Run the RRT* loop until convergence or the sample budget runs out.

    Fully deterministic for a fixed (instance, config, sampler) except for
    wall_time. `iteration_hook(tree, best_cost)` fires after every sample,
    for invariant auditing.
    """
    instance.validate()
    grid = instance.map
    rng = np.random.default_rng(config.rng_seed)
    if sampler is None:
        sampler = uniform_sample

    t0 = time.perf_counter()
    tree = Tree(instance.start, capacity=min(config.max_samples + 1, 1 << 16))
    area = float(grid.width * grid.height)
    goal = np.asarray(instance.goal)
    tol2 = instance.goal_tolerance**2
    goal_vertices: list[int] = []
    if (instance.start[0] - goal[0]) ** 2 + (instance.start[1] - goal[1]) ** 2 <= tol2:
        goal_vertices.append(0)

    samples_drawn = 0
    rewires = 0
    best_cost = math.inf
    terminated_by = "sample_budget"

    while samples_drawn < config.max_samples:
        samples_drawn += 1
        q = sampler(grid, rng)
        v_near = nearest(tree, q)
        q_new = steer(tree.point(v_near), q, config.step)
        if not is_free(grid, q_new):
            if iteration_hook is not None:
                iteration_hook(tree, best_cost)
            continue
        radius = near_radius(tree.n, config, area)
        near = near_vertices(tree, q_new, radius)
        if len(near) == 0:
            near = np.array([v_near])
        choice = choose_parent(tree, q_new, near, grid, config.resolution)
        if choice is None:
            if iteration_hook is not None:
                iteration_hook(tree, best_cost)
            continue
        parent, cost = choice
        v_new = tree.add(q_new, parent, cost)
        rewires += rewire(tree, v_new, near, grid, config.resolution)

        if (q_new[0] - goal[0]) ** 2 + (q_new[1] - goal[1]) ** 2 <= tol2:
            goal_vertices.append(v_new)
        if goal_vertices:
            best_cost = float(tree.cost[goal_vertices].min())

        if iteration_hook is not None:
            iteration_hook(tree, best_cost)

        if (
            config.reference_cost is not None
            and best_cost <= config.termination_ratio * config.reference_cost
        ):
            terminated_by = "converged"
            break

    path = extract_path(tree, instance)
    result = PlanResult(
        path=path,
        cost=best_cost if path is not None else None,
        vertices_added=tree.n - 1,
        samples_drawn=samples_drawn,
        rewire_count=rewires,
        wall_time=time.perf_counter() - t0,
        terminated_by=terminated_by,
    )
    return result, tree
