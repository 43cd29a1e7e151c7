"""Minimal netpbm I/O for the planner's file protocol.

Maps are binary PGMs where a pixel below 128 is an obstacle; region
probability maps store round(255 p) per pixel. This module deliberately
reimplements the small format rather than importing the planner package,
the file layout is the only contract between the two.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if not data.startswith(b"P5"):
        raise ValueError(f"{path}: not a binary PGM (P5)")
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1
    w, h, maxval = fields
    if maxval != 255:
        raise ValueError(f"{path}: unsupported maxval {maxval}")
    payload = data[pos : pos + w * h]
    if len(payload) != w * h:
        raise ValueError(f"{path}: truncated payload")
    return np.frombuffer(payload, dtype=np.uint8).reshape(h, w)


def load_obstacles(path) -> np.ndarray:
    """Boolean obstacle grid from a map PGM (pixel < 128 is blocked)."""
    return _read_pgm(path) < 128


def load_probability(path) -> np.ndarray:
    """Float probability grid in [0, 1] from a region PGM."""
    return _read_pgm(path).astype(np.float64) / 255.0


def save_probability(prob: np.ndarray, path) -> Path:
    prob = np.asarray(prob, dtype=np.float64)
    if prob.ndim != 2 or prob.min() < 0 or prob.max() > 1:
        raise ValueError("probability map must be 2-D with values in [0, 1]")
    h, w = prob.shape
    pixels = np.rint(prob * 255.0).astype(np.uint8)
    path = Path(path)
    path.write_bytes(b"P5\n%d %d\n255\n" % (w, h) + pixels.tobytes())
    return path
