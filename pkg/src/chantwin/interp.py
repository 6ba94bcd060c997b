"""Spatial-interpolation twin backends: inverse distance weighting and ordinary Kriging.

Both follow the scikit-learn estimator protocol (fit/predict, get_params) and accept
points of any dimension, so the same estimators serve 2-D map rasterization and 4-D
transceiver-pair twins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .validation import check_points, check_values

COINCIDENT_TOL = 1e-9  # query closer than this to a sample returns the sample value


@dataclass(frozen=True)
class VariogramModel:
    """Exponential variogram gamma(h) = nugget*1{h>0} + sill*(1 - exp(-h/range_m))."""

    sill: float
    range_m: float
    nugget: float = 0.0
    kind: str = "exponential"

    def __post_init__(self):
        if self.kind != "exponential":
            raise ValueError(f"unsupported variogram kind {self.kind!r}")
        if not self.sill > 0:
            raise ValueError(f"sill must be > 0, got {self.sill}")
        if not self.range_m > 0:
            raise ValueError(f"range_m must be > 0, got {self.range_m}")
        if self.nugget < 0:
            raise ValueError(f"nugget must be >= 0, got {self.nugget}")

    def __call__(self, h: np.ndarray) -> np.ndarray:
        h = np.asarray(h, dtype=float)
        return np.where(h > 0, self.nugget + self.sill * (1.0 - np.exp(-h / self.range_m)), 0.0)


def fit_variogram(points, values) -> VariogramModel:
    """Method-of-defaults variogram: sill from the sample variance, range from the
    bounding-box diagonal / 3, zero nugget. Not an optimizer."""
    points = check_points(points, "points")
    values = check_values(values, points.shape[0], "values")
    if points.shape[0] < 5:
        raise ValueError(f"variogram fitting needs >= 5 points, got {points.shape[0]}")
    sill = float(np.var(values, ddof=1))
    if sill <= 0:
        raise ValueError(
            "scatter values have zero variance; supply an explicit VariogramModel"
        )
    span = points.max(axis=0) - points.min(axis=0)
    diag = float(np.sqrt(np.sum(span ** 2)))
    if diag <= 0:
        raise ValueError("scatter positions are degenerate (zero bounding box)")
    return VariogramModel(sill=sill, range_m=diag / 3.0)


class IdwInterpolator(BaseEstimator, RegressorMixin):
    """Inverse-distance-weighted interpolation with weights d**(-power).

    A query within 1e-9 m of a sample returns that sample's value exactly.
    """

    def __init__(self, power: float = 2.0):
        self.power = power

    def fit(self, X, y):
        if not self.power > 0:
            raise ValueError(f"power must be > 0, got {self.power}")
        self.points_ = check_points(X, "X")
        self.values_ = check_values(y, self.points_.shape[0], "y")
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "points_"):
            raise RuntimeError("IdwInterpolator must be fitted before predict")
        X = check_points(X, "X")
        if X.shape[1] != self.points_.shape[1]:
            raise ValueError(f"query dimension {X.shape[1]} != fit dimension "
                             f"{self.points_.shape[1]}")
        d = np.sqrt(((X[:, None, :] - self.points_[None, :, :]) ** 2).sum(axis=2))
        out = np.empty(X.shape[0])
        coincident = d < COINCIDENT_TOL
        hit = coincident.any(axis=1)
        for i in np.nonzero(hit)[0]:
            out[i] = self.values_[np.argmax(coincident[i])]
        rest = ~hit
        if rest.any():
            w = d[rest] ** (-self.power)
            out[rest] = (w * self.values_).sum(axis=1) / w.sum(axis=1)
        return out


class KrigingInterpolator(BaseEstimator, RegressorMixin):
    """Ordinary Kriging with an exponential variogram and a dense direct solver.

    ``variogram=None`` fits method-of-defaults parameters from the data. The
    bordered system (variogram matrix + unbiasedness row) is factorized once at
    fit time; duplicated sample positions make it singular and raise.
    """

    def __init__(self, variogram: VariogramModel | None = None):
        self.variogram = variogram

    def fit(self, X, y):
        self.points_ = check_points(X, "X")
        self.values_ = check_values(y, self.points_.shape[0], "y")
        d = np.sqrt(((self.points_[:, None, :] - self.points_[None, :, :]) ** 2).sum(axis=2))
        n = self.points_.shape[0]
        if n > 1 and np.min(d[~np.eye(n, dtype=bool)]) == 0.0:
            raise ValueError("duplicated sample positions make the Kriging system singular")
        self.variogram_ = self.variogram if self.variogram is not None \
            else fit_variogram(self.points_, self.values_)
        a = np.zeros((n + 1, n + 1))
        a[:n, :n] = self.variogram_(d)
        a[n, :n] = 1.0
        a[:n, n] = 1.0
        self.system_ = a
        return self

    def _solve(self, X) -> np.ndarray:
        """Weights-and-multiplier columns, shape (n+1, n_queries)."""
        if not hasattr(self, "system_"):
            raise RuntimeError("KrigingInterpolator must be fitted before predict")
        X = check_points(X, "X")
        if X.shape[1] != self.points_.shape[1]:
            raise ValueError(f"query dimension {X.shape[1]} != fit dimension "
                             f"{self.points_.shape[1]}")
        n = self.points_.shape[0]
        h = np.sqrt(((X[:, None, :] - self.points_[None, :, :]) ** 2).sum(axis=2))
        b = np.empty((n + 1, X.shape[0]))
        b[:n, :] = self.variogram_(h).T
        b[n, :] = 1.0
        try:
            return np.linalg.solve(self.system_, b)
        except np.linalg.LinAlgError as exc:
            raise ValueError(f"singular Kriging system: {exc}") from exc

    def predict(self, X) -> np.ndarray:
        sol = self._solve(X)
        n = self.points_.shape[0]
        return sol[:n, :].T @ self.values_

    def weights(self, X) -> np.ndarray:
        """Kriging weights per query, shape (n_queries, n_samples); rows sum to 1."""
        n = self.points_.shape[0]
        return self._solve(X)[:n, :].T
