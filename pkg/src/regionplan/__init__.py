"""Region-guided sampling-based path planning toolkit.

Occupancy-grid environments, RRT* with pluggable samplers, promising-region
sampling, purity-based segmentation losses, procedural dataset generation,
and a benchmark harness.
"""

from .grid import GridMap, Point, RegionMask, dilate, is_free, load_map, save_map, segment_free
from .planner import PlanInstance, PlannerConfig, PlanResult, Tree, plan
from .region import ProbabilityMap, RegionSampler, load_region, oracle_region, save_region

__all__ = [
    "GridMap",
    "Point",
    "RegionMask",
    "ProbabilityMap",
    "RegionSampler",
    "PlanInstance",
    "PlannerConfig",
    "PlanResult",
    "Tree",
    "plan",
    "dilate",
    "is_free",
    "segment_free",
    "load_map",
    "save_map",
    "load_region",
    "save_region",
    "oracle_region",
]

__version__ = "0.1.0"
