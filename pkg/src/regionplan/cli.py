"""Command-line interface for dataset generation, planning, benchmarking,
region evaluation, and rendering."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import bench, datagen, region
from .planner import PlannerConfig, plan
from .region import RegionSampler, load_region, region_strategy, save_region


def _cmd_generate(args) -> int:
    params = datagen.GenParams.for_size(args.size, seed=args.seed)
    manifest = datagen.build_dataset(args.n, params, args.out)
    print(manifest)
    return 0


def _load_instance(path):
    path = Path(path)
    record = json.loads(path.read_text())
    record.setdefault("id", path.stem)
    return bench.load_instance_record(record, path.parent)


def _plan_once(args):
    instance, record = _load_instance(args.instance)
    sampler = None
    if args.region:
        pm = load_region(args.region, expected_shape=instance.map.cells.shape)
        sampler = region_strategy(RegionSampler(pm), args.bias)
    config = PlannerConfig.for_map(
        instance.map,
        heuristic_bias=args.bias if args.region else 0.0,
        max_samples=args.max_samples,
        reference_cost=record.get("reference_cost"),
        rng_seed=args.seed,
    )
    result, tree = plan(instance, config, sampler)
    return instance, record, result, tree


def _cmd_plan(args) -> int:
    _, _, result, _ = _plan_once(args)
    out = dataclasses.asdict(result)
    out["path"] = [[p.x, p.y] for p in result.path] if result.path else None
    print(json.dumps(out, indent=2))
    return 0


def _cmd_bench(args) -> int:
    config = bench.BenchConfig(
        dataset=Path(args.dataset),
        methods=tuple(args.methods),
        trials=args.trials,
        max_samples=args.max_samples,
        termination_ratio=args.termination_ratio,
        heuristic_bias=args.bias,
        seed=args.seed,
        region_dir=Path(args.region_dir) if args.region_dir else None,
    )
    out = bench.run_benchmark(config, args.out)
    print(out)
    return 0


def _cmd_summarize(args) -> int:
    summary = bench.summarize(args.csv)
    print(json.dumps(summary, indent=2))
    return 0


def _cmd_eval_region(args) -> int:
    pred = load_region(args.pred)
    gt = load_region(args.gt, expected_shape=pred.cells.shape)
    print(json.dumps(bench.eval_region(pred, gt), indent=2))
    return 0


def _cmd_oracle_region(args) -> int:
    instance, _ = _load_instance(args.instance)
    radius = args.radius
    if radius is None:
        radius = region.default_dilation_radius(instance.map)
    pm = region.oracle_region(instance.map, instance.start, instance.goal, radius)
    save_region(pm, args.out)
    print(args.out)
    return 0


def _cmd_render(args) -> int:
    instance, record, result, tree = _plan_once(args)
    pm = None
    if args.region:
        pm = load_region(args.region, expected_shape=instance.map.cells.shape)
    bench.render(instance, result, tree, pm, args.out)
    print(args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regionplan")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="build a procedural dataset")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    def add_plan_args(p):
        p.add_argument("--instance", required=True, help="instance JSON manifest")
        p.add_argument("--region", help="region PGM used for biased sampling")
        p.add_argument("--bias", type=float, default=0.8)
        p.add_argument("--max-samples", type=int, default=5000)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("plan", help="run one planner instance, print JSON result")
    add_plan_args(p)
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("bench", help="run the benchmark harness")
    p.add_argument("--dataset", required=True, help="dataset manifest.json")
    p.add_argument("--methods", nargs="+", default=["uniform", "oracle-region"],
                   choices=bench.METHODS)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--max-samples", type=int, default=5000)
    p.add_argument("--termination-ratio", type=float, default=1.03)
    p.add_argument("--bias", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--region-dir", help="directory of <id>.region.pgm predictions")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("summarize", help="aggregate a bench CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_summarize)

    p = sub.add_parser("eval-region", help="region metrics for a prediction")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_eval_region)

    p = sub.add_parser("oracle-region", help="write the ground-truth region")
    p.add_argument("--instance", required=True)
    p.add_argument("--radius", type=float)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_oracle_region)

    p = sub.add_parser("render", help="plan once and rasterize the result")
    add_plan_args(p)
    p.add_argument("--out", required=True, help="output PPM path")
    p.set_defaults(func=_cmd_render)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
