"""Training loop and region export.

Adam with cosine annealing warm restarts, per-epoch Dice on the
validation split, best-validation checkpointing. Deterministic for a
fixed seed up to backend nondeterminism.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from . import loss as L
from .data import Record, load_records, rasterize_input, to_tensors
from .model import NetworkConfig, build_network
from .pgmio import save_probability

CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    batch_size: int = 8
    learning_rate: float = 1e-3
    restart_period: int = 20  # cosine annealing T_0, in epochs
    restart_mult: int = 2
    seed: int = 0
    loss: L.LossConfig = L.LossConfig()
    train_split: str = "train"
    val_split: str = "val"
    early_stop_dice: float | None = None  # stop once train Dice reaches this

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


def _batch_loss(model, xs, ys, config: L.LossConfig) -> torch.Tensor:
    main, sides = model(xs)
    total = torch.zeros((), dtype=main.dtype)
    for i in range(xs.shape[0]):
        pred = main[i, 0]
        side_i = [s[i, 0] for s in sides]
        total = total + L.hybrid_loss_diff(pred, side_i, ys[i, 0], config)
    return total / xs.shape[0]


@torch.no_grad()
def _mean_dice(model, xs, ys) -> float:
    """Mean Dice of the thresholded (0.5) predictions, the usual
    evaluation convention; the loss itself stays soft."""
    model.eval()
    main, _ = model(xs)
    dices = [
        float(L.dice_coefficient((main[i, 0] >= 0.5).to(ys.dtype), ys[i, 0]))
        for i in range(xs.shape[0])
    ]
    model.train()
    return float(np.mean(dices))


def train(manifest_path, net: NetworkConfig, tc: TrainConfig,
          checkpoint_path, log=print) -> dict:
    """Train on the manifest's train split, checkpoint the best-val epoch.

    Returns the history dict that is also stored in the checkpoint.
    """
    torch.manual_seed(tc.seed)
    train_records = load_records(manifest_path, tc.train_split)
    val_records = load_records(manifest_path, tc.val_split)
    xs, ys = to_tensors(train_records)
    vxs, vys = to_tensors(val_records)
    if xs.shape[-1] != net.input_size:
        raise ValueError(
            f"dataset size {xs.shape[-1]} does not match input_size {net.input_size}"
        )

    model = build_network(net)
    model.train()
    optimizer = torch.optim.Adam(model.parameters(), lr=tc.learning_rate)
    scheduler = torch.optim.lr_scheduler.CosineAnnealingWarmRestarts(
        optimizer, T_0=tc.restart_period, T_mult=tc.restart_mult
    )

    order_rng = np.random.default_rng(tc.seed)
    best = {"val_dice": -1.0, "epoch": -1, "state": None}
    history = {"train_loss": [], "train_dice": [], "val_dice": []}
    for epoch in range(tc.epochs):
        perm = order_rng.permutation(len(train_records))
        epoch_loss = 0.0
        for lo in range(0, len(perm), tc.batch_size):
            idx = perm[lo : lo + tc.batch_size]
            optimizer.zero_grad()
            batch_loss = _batch_loss(model, xs[idx], ys[idx], tc.loss)
            batch_loss.backward()
            optimizer.step()
            epoch_loss += float(batch_loss.detach()) * len(idx)
        scheduler.step()

        train_dice = _mean_dice(model, xs, ys)
        val_dice = _mean_dice(model, vxs, vys)
        history["train_loss"].append(epoch_loss / len(train_records))
        history["train_dice"].append(train_dice)
        history["val_dice"].append(val_dice)
        log(
            f"epoch {epoch + 1}/{tc.epochs} loss {history['train_loss'][-1]:.3f} "
            f"train dice {train_dice:.4f} val dice {val_dice:.4f}"
        )
        if val_dice > best["val_dice"]:
            best = {
                "val_dice": val_dice,
                "epoch": epoch,
                "state": {k: v.detach().clone() for k, v in model.state_dict().items()},
            }
        if tc.early_stop_dice is not None and train_dice >= tc.early_stop_dice:
            break

    torch.save(
        {
            "version": CHECKPOINT_VERSION,
            "network": dataclasses.asdict(net),
            "state_dict": best["state"],
            "best_epoch": best["epoch"],
            "best_val_dice": best["val_dice"],
            "history": history,
        },
        checkpoint_path,
    )
    return history


def load_checkpoint(path):
    payload = torch.load(path, weights_only=True)
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version")
    net = NetworkConfig(**payload["network"])
    model = build_network(net)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, payload


@torch.no_grad()
def predict_export(checkpoint_path, manifest_path, split, out_dir) -> list[Path]:
    """Write one <id>.region.pgm per instance in the split."""
    model, _ = load_checkpoint(checkpoint_path)
    records = load_records(manifest_path, split)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for record in records:
        x = rasterize_input(record.obstacles, record.start, record.goal)
        main, _ = model(x.unsqueeze(0))
        prob = main[0, 0].numpy().astype(np.float64)
        written.append(save_probability(prob, out_dir / f"{record.id}.region.pgm"))
    return written


def predict_one(model, record: Record) -> np.ndarray:
    with torch.no_grad():
        x = rasterize_input(record.obstacles, record.start, record.goal)
        main, _ = model(x.unsqueeze(0))
    return main[0, 0].numpy().astype(np.float64)
