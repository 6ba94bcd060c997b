"""Prediction-error statistics: MAE/MSE and boxplot summaries with outlier fences."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .validation import fmt_float


@dataclass
class BoxStats:
    median: float
    q1: float
    q3: float
    iqr: float
    lower_fence: float
    upper_fence: float
    outliers: list[float] = field(default_factory=list)


def error_metrics(pred, truth) -> tuple[float, float]:
    """(MAE, MSE) between equal-length prediction and truth vectors."""
    pred = np.asarray(pred, dtype=float).ravel()
    truth = np.asarray(truth, dtype=float).ravel()
    if pred.shape[0] == 0:
        raise ValueError("empty inputs")
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: {pred.shape[0]} vs {truth.shape[0]}")
    err = pred - truth
    return float(np.mean(np.abs(err))), float(np.mean(err ** 2))


def _quantile(sorted_vals: np.ndarray, p: float) -> float:
    """Linear interpolation between order statistics at index (n-1)*p."""
    idx = (sorted_vals.shape[0] - 1) * p
    lo = int(np.floor(idx))
    hi = int(np.ceil(idx))
    frac = idx - lo
    return float(sorted_vals[lo] * (1 - frac) + sorted_vals[hi] * frac)


def box_stats(values) -> BoxStats:
    """Five-number boxplot summary; outliers are the values strictly outside the
    1.5*IQR fences."""
    values = np.asarray(values, dtype=float).ravel()
    if values.shape[0] < 4:
        raise ValueError(f"box_stats needs >= 4 values, got {values.shape[0]}")
    s = np.sort(values)
    q1 = _quantile(s, 0.25)
    median = _quantile(s, 0.5)
    q3 = _quantile(s, 0.75)
    iqr = q3 - q1
    lower = q1 - 1.5 * iqr
    upper = q3 + 1.5 * iqr
    outliers = [float(v) for v in values if v < lower or v > upper]
    return BoxStats(median, q1, q3, iqr, lower, upper, outliers)


def save_box_stats(stats: BoxStats, path) -> None:
    """Long-format CSV (stat,value): one row per scalar, one 'outlier' row per value."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("stat,value\n")
        for name in ("median", "q1", "q3", "iqr", "lower_fence", "upper_fence"):
            fh.write(f"{name},{fmt_float(getattr(stats, name))}\n")
        for v in stats.outliers:
            fh.write(f"outlier,{fmt_float(v)}\n")


def load_box_stats(path) -> BoxStats:
    fields: dict[str, float] = {}
    outliers: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "stat,value":
            raise ValueError(f"unexpected box-stats header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            name, val = line.split(",")
            if name == "outlier":
                outliers.append(float(val))
            else:
                fields[name] = float(val)
    return BoxStats(fields["median"], fields["q1"], fields["q3"], fields["iqr"],
                    fields["lower_fence"], fields["upper_fence"], outliers)
