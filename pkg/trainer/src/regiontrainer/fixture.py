"""Golden loss fixture verification.

The planner toolkit emits a JSON corpus of random inputs with its own
loss values; this module replays them through the differentiable
implementation and reports the largest deviation. It is the numeric
contract between the two packages.
"""

from __future__ import annotations

import json
from importlib import resources

import torch

from . import loss as L

FIXTURE_RESOURCE = "loss_fixture.json"


def load_fixture(path=None) -> dict:
    if path is not None:
        return json.loads(open(path).read())
    ref = resources.files("regiontrainer").joinpath("data", FIXTURE_RESOURCE)
    return json.loads(ref.read_text())


def check_case(case: dict) -> dict:
    """Absolute deviations per loss term for one fixture case."""
    config = L.LossConfig(
        sigma_smoothing=case["config"]["sigma_smoothing"],
        alpha=case["config"]["alpha"],
        beta=tuple(case["config"]["beta"]),
        epsilon_clamp=case["config"]["epsilon_clamp"],
    )
    pred = torch.tensor(case["pred"], dtype=torch.float64)
    gt = torch.tensor(case["gt"], dtype=torch.float64)
    sides = [torch.tensor(s, dtype=torch.float64) for s in case["side_outputs"]]
    expected = case["expected"]
    got = {
        "wbce": float(L.weighted_bce(pred, gt, config)),
        "dice_loss": float(L.dice_loss(pred, gt)),
        "purity_loss": float(L.purity_loss(pred, gt)),
        "supervised": float(L.supervised_loss(sides, gt, config)),
        "hybrid": float(L.hybrid_loss_diff(pred, sides, gt, config)),
    }
    return {k: abs(got[k] - expected[k]) for k in got}


def verify(path=None, tolerance: float = 1e-5) -> tuple[bool, float, int]:
    """Returns (ok, max deviation, case count)."""
    fixture = load_fixture(path)
    worst = 0.0
    for case in fixture["cases"]:
        worst = max(worst, max(check_case(case).values()))
    return worst <= tolerance, worst, len(fixture["cases"])
