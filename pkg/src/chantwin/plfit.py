"""Log-distance path-loss baseline fitted by closed-form least squares."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .validation import as_xy, check_link_coords, fmt_float


class LogDistancePathLoss(BaseEstimator, RegressorMixin):
    """gain(d) = -(a + b * log10(max(d, d_min))): distance is the only covariate.

    Fitting solves the 2x2 normal equations of path loss (-gain) against
    log10(distance) in closed form.
    """

    def __init__(self, d_min: float = 1.0):
        self.d_min = d_min

    @staticmethod
    def _distances(X: np.ndarray) -> np.ndarray:
        return np.hypot(X[:, 2] - X[:, 0], X[:, 3] - X[:, 1])

    def fit(self, X, y):
        if not self.d_min > 0:
            raise ValueError(f"d_min must be > 0, got {self.d_min}")
        X = check_link_coords(X)
        y = np.asarray(y, dtype=float).ravel()
        if X.shape[0] != y.shape[0]:
            raise ValueError("X and y row counts differ")
        if X.shape[0] < 2:
            raise ValueError("path-loss fit needs at least 2 samples")
        u = np.log10(np.maximum(self._distances(X), self.d_min))
        loss = -y
        n = u.shape[0]
        su, sl = u.sum(), loss.sum()
        suu, sul = (u * u).sum(), (u * loss).sum()
        det = n * suu - su * su
        if det <= 0 or np.ptp(u) == 0:
            raise ValueError("all samples share one distance; slope is unidentifiable")
        b = (n * sul - su * sl) / det
        a = (sl - b * su) / n
        self.a_db_ = float(a)
        self.b_db_per_decade_ = float(b)
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "a_db_"):
            raise RuntimeError("LogDistancePathLoss must be fitted before predict")
        X = check_link_coords(X)
        d = np.maximum(self._distances(X), self.d_min)
        return -(self.a_db_ + self.b_db_per_decade_ * np.log10(d))

    def gain(self, tx, rx) -> float:
        txx, txy = as_xy(tx)
        rxx, rxy = as_xy(rx)
        return float(self.predict(np.array([[txx, txy, rxx, rxy]]))[0])


def save_pl_model(model: LogDistancePathLoss, path) -> None:
    """One line: a_db b_db_per_decade d_min."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{fmt_float(model.a_db_)} {fmt_float(model.b_db_per_decade_)} "
                 f"{fmt_float(model.d_min)}\n")


def load_pl_model(path) -> LogDistancePathLoss:
    with open(path, "r", encoding="utf-8") as fh:
        toks = fh.readline().split()
    if len(toks) != 3:
        raise ValueError(f"malformed path-loss model file {path}: expected 3 numbers")
    model = LogDistancePathLoss(d_min=float(toks[2]))
    model.a_db_ = float(toks[0])
    model.b_db_per_decade_ = float(toks[1])
    return model
