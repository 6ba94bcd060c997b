"""Measurement campaign machinery: anchor grids, oracle-labeled datasets, splits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .env import Environment
from .propagation import ChannelOracle, PropagationParams
from .validation import fmt_float

CSV_HEADER = "tx_x,tx_y,rx_x,rx_y,gain_db"
DEFAULT_ANCHOR_SPACING = 8.0


@dataclass
class Dataset:
    """Ordered measurement rows; `coords` is (n, 4) tx/rx pairs, `gains` is (n,) dB."""

    coords: np.ndarray
    gains: np.ndarray
    seed: int = 0
    split_tag: str = "train"

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=float).reshape(-1, 4)
        self.gains = np.asarray(self.gains, dtype=float).ravel()
        if self.coords.shape[0] != self.gains.shape[0]:
            raise ValueError("coords and gains row counts differ")
        if self.coords.shape[0] == 0:
            raise ValueError("dataset is empty")
        if not (np.all(np.isfinite(self.coords)) and np.all(np.isfinite(self.gains))):
            raise ValueError("dataset contains non-finite entries")

    def __len__(self) -> int:
        return self.coords.shape[0]

    def subset(self, idx: np.ndarray, split_tag: str) -> "Dataset":
        return Dataset(self.coords[idx], self.gains[idx], self.seed, split_tag)


def anchor_grid(env: Environment, spacing: float) -> np.ndarray:
    """Origin-anchored measurement lattice, row-major (y rows, x scanning).

    Returns (n, 2) coordinates (i*spacing, j*spacing) with both axes capped at the
    RoI bounds (boundary inclusive).
    """
    if not spacing > 0:
        raise ValueError(f"spacing must be > 0, got {spacing}")
    nx = int(math.floor(env.roi_width / spacing)) + 1
    ny = int(math.floor(env.roi_height / spacing)) + 1
    xs = np.arange(nx) * spacing
    ys = np.arange(ny) * spacing
    gx, gy = np.meshgrid(xs, ys)  # row-major over (y, x)
    return np.column_stack([gx.ravel(), gy.ravel()])


def build_dataset(
    env: Environment,
    params: PropagationParams,
    n_samples: int,
    seed: int,
    spacing: float = DEFAULT_ANCHOR_SPACING,
    noise_sigma_db: float = 0.0,
) -> Dataset:
    """Sample distinct ordered anchor pairs (tx != rx) and label them with the oracle.

    Pairs are drawn uniformly without replacement; optional measurement noise is
    additive Gaussian in dB (off by default).
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    anchors = anchor_grid(env, spacing)
    n_anchors = anchors.shape[0]
    n_pairs = n_anchors * (n_anchors - 1)
    if n_samples > n_pairs:
        raise ValueError(
            f"n_samples={n_samples} exceeds the {n_pairs} distinct ordered anchor "
            f"pairs available ({n_anchors} anchors, tx=rx excluded)"
        )
    rng = np.random.default_rng(seed)
    flat = rng.choice(n_pairs, size=n_samples, replace=False)
    tx_idx = flat // (n_anchors - 1)
    rx_off = flat % (n_anchors - 1)
    rx_idx = np.where(rx_off >= tx_idx, rx_off + 1, rx_off)  # skip the diagonal
    coords = np.hstack([anchors[tx_idx], anchors[rx_idx]])
    gains = ChannelOracle(env, params).predict(coords)
    if noise_sigma_db > 0:
        gains = gains + rng.normal(0.0, noise_sigma_db, size=n_samples)
    return Dataset(coords, gains, seed=seed, split_tag="train")


def split_dataset(
    ds: Dataset, fractions: tuple[float, float, float], seed: int
) -> tuple[Dataset, Dataset, Dataset]:
    """Seeded random partition into train/val/test with largest-remainder sizing."""
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) != 3 or any(f <= 0 for f in fractions):
        raise ValueError(f"fractions must be three positive numbers, got {fractions}")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"fractions must sum to 1, got {sum(fractions)}")
    n = len(ds)
    raw = [f * n for f in fractions]
    sizes = [int(math.floor(r)) for r in raw]
    remainders = [r - s for r, s in zip(raw, sizes)]
    # Hand out the leftover rows by largest fractional remainder (ties: earlier split).
    order = sorted(range(3), key=lambda i: (-remainders[i], i))
    for i in range(n - sum(sizes)):
        sizes[order[i % 3]] += 1
    if any(s == 0 for s in sizes):
        raise ValueError(f"split sizes {sizes} include an empty split for n={n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    tags = ("train", "val", "test")
    out = []
    start = 0
    for size, tag in zip(sizes, tags):
        out.append(ds.subset(perm[start:start + size], tag))
        start += size
    return tuple(out)


def save_dataset(ds: Dataset, path) -> None:
    """Write the dataset CSV (exact header, shortest round-trip decimals)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for row, g in zip(ds.coords, ds.gains):
            fh.write(",".join(fmt_float(v) for v in row) + "," + fmt_float(g) + "\n")


def load_dataset(path, split_tag: str = "train") -> Dataset:
    """Read a dataset CSV written by :func:`save_dataset`."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected dataset header {header!r}, want {CSV_HEADER!r}")
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 5:
                raise ValueError(f"line {lineno}: expected 5 columns, got {len(parts)}")
            rows.append([float(p) for p in parts])
    if not rows:
        raise ValueError(f"dataset file {path} has no rows")
    arr = np.array(rows, dtype=float)
    return Dataset(arr[:, :4], arr[:, 4], split_tag=split_tag)
