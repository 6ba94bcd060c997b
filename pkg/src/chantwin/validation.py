"""Input validation helpers shared by the estimators and pipeline stages."""

from __future__ import annotations

import numpy as np


def as_xy(pos) -> tuple[float, float]:
    """Coerce a position-like object (Position, tuple, array) to an (x, y) float pair."""
    if hasattr(pos, "x") and hasattr(pos, "y"):
        x, y = float(pos.x), float(pos.y)
    else:
        x, y = (float(v) for v in pos)
    if not (np.isfinite(x) and np.isfinite(y)):
        raise ValueError(f"position must have finite coordinates, got ({x}, {y})")
    return x, y


def check_points(X, name: str = "X") -> np.ndarray:
    """Validate a 2-D array of point coordinates (n_points, n_dims), n_points >= 1."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"{name} must be a 2-D array of shape (n_points, n_dims), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite coordinates")
    return X


def check_values(y, n: int, name: str = "y") -> np.ndarray:
    """Validate a 1-D array of n finite values."""
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != n:
        raise ValueError(f"{name} has {y.shape[0]} values, expected {n}")
    if not np.all(np.isfinite(y)):
        raise ValueError(f"{name} contains non-finite values")
    return y


def check_link_coords(X, name: str = "X") -> np.ndarray:
    """Validate an array of transceiver coordinate rows (tx_x, tx_y, rx_x, rx_y)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1 and X.shape[0] == 4:
        X = X.reshape(1, 4)
    if X.ndim != 2 or X.shape[1] != 4:
        raise ValueError(f"{name} must have shape (n, 4): tx_x, tx_y, rx_x, rx_y; got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite coordinates")
    return X


def fmt_float(v: float) -> str:
    """Decimal text that round-trips to the exact same float (shortest repr)."""
    return repr(float(v))
