"""Regenerate the golden loss fixture from the planner toolkit.

This is the only place the trainer touches regionplan code; the emitted
JSON is the interface. Run from the trainer directory:

    python3 tools/make_loss_fixture.py
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from regionplan import losses

OUT = Path(__file__).resolve().parents[1] / "src" / "regiontrainer" / "data" / "loss_fixture.json"
N_CASES = 50
SIZE = 8


def make_case(rng: np.random.Generator) -> dict:
    pred = rng.random((SIZE, SIZE))
    gt = (rng.random((SIZE, SIZE)) < rng.uniform(0.2, 0.8)).astype(np.float64)
    # An 8x8 grid admits supervision levels 1..3 (4x4, 2x2, 1x1).
    n_sides = int(rng.integers(0, 4))
    sides = [rng.random((SIZE >> l, SIZE >> l)) for l in range(1, n_sides + 1)]
    alpha = None if rng.random() < 0.5 else float(rng.uniform(0.0, 0.1))
    config = losses.LossConfig(
        sigma_smoothing=float(rng.uniform(0.5, 2.0)),
        alpha=alpha,
    )
    return {
        "pred": pred.tolist(),
        "gt": gt.tolist(),
        "side_outputs": [s.tolist() for s in sides],
        "config": {
            "sigma_smoothing": config.sigma_smoothing,
            "alpha": config.alpha,
            "beta": list(config.beta),
            "epsilon_clamp": config.epsilon_clamp,
        },
        "expected": {
            "wbce": losses.weighted_bce(pred, gt, config),
            "dice_loss": losses.dice_loss(pred, gt),
            "purity_loss": losses.purity_loss(pred, gt),
            "supervised": losses.supervised_loss(sides, gt, config),
            "hybrid": losses.hybrid_loss(pred, sides, gt, config),
        },
    }


def main() -> None:
    rng = np.random.default_rng(2024)
    cases = [make_case(rng) for _ in range(N_CASES)]
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps({"size": SIZE, "cases": cases}) + "\n")
    print(f"wrote {OUT} ({len(cases)} cases)")


if __name__ == "__main__":
    main()
