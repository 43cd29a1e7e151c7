"""Command-line interface: train, predict, verify-loss."""

from __future__ import annotations

import argparse
import sys

from . import fixture
from .loss import LossConfig
from .model import NetworkConfig
from .train import TrainConfig, predict_export, train


def _cmd_train(args) -> int:
    net = NetworkConfig(input_size=args.input_size, base_channels=args.base_channels)
    tc = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        seed=args.seed,
        loss=LossConfig(),
        train_split=args.train_split,
        val_split=args.val_split,
        early_stop_dice=args.early_stop_dice,
    )
    history = train(args.manifest, net, tc, args.out)
    print(f"{args.out}: best train dice {max(history['train_dice']):.4f}, "
          f"best val dice {max(history['val_dice']):.4f}")
    return 0


def _cmd_predict(args) -> int:
    written = predict_export(args.checkpoint, args.manifest, args.split, args.out)
    for path in written:
        print(path)
    return 0


def _cmd_verify_loss(args) -> int:
    ok, worst, n = fixture.verify(args.fixture, args.tolerance)
    status = "ok" if ok else "FAILED"
    print(f"loss parity {status}: {n} cases, max deviation {worst:.3e} "
          f"(tolerance {args.tolerance:g})")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regiontrainer")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a region predictor on a dataset")
    p.add_argument("--manifest", required=True, help="dataset manifest.json")
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--input-size", type=int, default=64)
    p.add_argument("--base-channels", type=int, default=8)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--train-split", default="train")
    p.add_argument("--val-split", default="val")
    p.add_argument("--early-stop-dice", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="export region PGMs for a split")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("verify-loss", help="replay the golden loss fixture")
    p.add_argument("--fixture", help="fixture JSON (default: packaged corpus)")
    p.add_argument("--tolerance", type=float, default=1e-5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_verify_loss)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
