import subprocess
import sys

import pytest

from regiontrainer import NetworkConfig, TrainConfig, train


def generate_dataset(out_dir, n, size, seed):
    subprocess.run(
        [
            sys.executable, "-m", "regionplan.cli", "generate",
            "--n", str(n), "--size", str(size), "--seed", str(seed),
            "--out", str(out_dir),
        ],
        check=True,
        capture_output=True,
    )
    return out_dir / "manifest.json"


@pytest.fixture(scope="session")
def make_dataset():
    return generate_dataset


@pytest.fixture(scope="session")
def dataset10(tmp_path_factory):
    """Ten 64x64 instances, the overfit corpus."""
    return generate_dataset(tmp_path_factory.mktemp("ds10"), 10, 64, 7)


@pytest.fixture(scope="session")
def overfit_checkpoint(dataset10, tmp_path_factory):
    """Checkpoint and history of a 10-instance overfit run."""
    ck = tmp_path_factory.mktemp("ck") / "model.pt"
    net = NetworkConfig(input_size=64, base_channels=8)
    tc = TrainConfig(
        epochs=200,
        batch_size=10,
        learning_rate=5e-3,
        restart_period=50,
        seed=0,
        train_split="all",
        val_split="all",
        early_stop_dice=0.95,
    )
    history = train(dataset10, net, tc, ck, log=lambda s: None)
    return ck, history
