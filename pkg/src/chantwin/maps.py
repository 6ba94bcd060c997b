"""Gain-map rasterization over the RoI, directly from a predictor or through the
sample-then-interpolate pipeline."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .env import Environment
from .interp import IdwInterpolator, KrigingInterpolator, VariogramModel, fit_variogram
from .validation import as_xy, fmt_float

DEFAULT_RESOLUTION = 2.0
MAP_CSV_HEADER = "x,y,gain_db"


@dataclass
class GainMap:
    """Row-major grid of predicted gains for one transmitter over the RoI."""

    origin: tuple[float, float]
    resolution: float
    width: int   # cells along x
    height: int  # cells along y
    values: np.ndarray  # shape (height, width), [iy, ix]
    tx: tuple[float, float]
    backend_tag: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.height, self.width):
            raise ValueError(f"values shape {self.values.shape} != "
                             f"(height={self.height}, width={self.width})")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("gain map contains non-finite values")

    def cell_centers(self) -> np.ndarray:
        """(height*width, 2) cell-center coordinates in row-major order."""
        xs = (np.arange(self.width) + 0.5) * self.resolution + self.origin[0]
        ys = (np.arange(self.height) + 0.5) * self.resolution + self.origin[1]
        gx, gy = np.meshgrid(xs, ys)
        return np.column_stack([gx.ravel(), gy.ravel()])


def _grid_shape(env: Environment, resolution: float) -> tuple[int, int]:
    if not resolution > 0:
        raise ValueError(f"resolution must be > 0, got {resolution}")
    return (int(math.ceil(env.roi_width / resolution)),
            int(math.ceil(env.roi_height / resolution)))


def _clamped_centers(env: Environment, resolution: float) -> tuple[np.ndarray, int, int]:
    w, h = _grid_shape(env, resolution)
    xs = np.minimum((np.arange(w) + 0.5) * resolution, env.roi_width)
    ys = np.minimum((np.arange(h) + 0.5) * resolution, env.roi_height)
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()]), w, h


def build_gain_map(env: Environment, predictor, tx, resolution: float = DEFAULT_RESOLUTION,
                   backend_tag: str = "oracle") -> GainMap:
    """Evaluate the predictor at every cell center for a fixed transmitter.

    Centers of boundary-overhanging cells (non-divisible RoI) are clamped onto
    the RoI edge so every query stays inside the region.
    """
    txx, txy = env.require_inside(tx, "tx")
    centers, w, h = _clamped_centers(env, resolution)
    links = np.hstack([np.tile([[txx, txy]], (centers.shape[0], 1)), centers])
    values = np.asarray(predictor.predict(links), dtype=float).reshape(h, w)
    return GainMap((0.0, 0.0), resolution, w, h, values, (txx, txy), backend_tag)


def build_si_map(env: Environment, predictor, tx, n_seeds: int, seed: int,
                 method: str = "kriging",
                 resolution: float = DEFAULT_RESOLUTION) -> GainMap:
    """Query the predictor at seeded-random receiver positions, then rasterize the
    full grid with the chosen spatial interpolator."""
    if n_seeds < 3:
        raise ValueError(f"n_seeds must be >= 3, got {n_seeds}")
    if method not in ("idw", "kriging"):
        raise ValueError(f"method must be 'idw' or 'kriging', got {method!r}")
    txx, txy = env.require_inside(tx, "tx")
    rng = np.random.default_rng(seed)
    pts = np.column_stack([rng.uniform(0.0, env.roi_width, n_seeds),
                           rng.uniform(0.0, env.roi_height, n_seeds)])
    links = np.hstack([np.tile([[txx, txy]], (n_seeds, 1)), pts])
    vals = np.asarray(predictor.predict(links), dtype=float)

    if method == "idw":
        interp = IdwInterpolator().fit(pts, vals)
    else:
        try:
            variogram = fit_variogram(pts, vals)
        except ValueError:
            # Flat or tiny scatter: any valid variogram keeps the unit-sum weights,
            # so the interpolant is still exact for constant fields.
            span = pts.max(axis=0) - pts.min(axis=0)
            diag = float(np.sqrt(np.sum(span ** 2)))
            variogram = VariogramModel(sill=1.0, range_m=diag / 3.0 if diag > 0 else 1.0)
        interp = KrigingInterpolator(variogram).fit(pts, vals)

    centers, w, h = _clamped_centers(env, resolution)
    values = interp.predict(centers).reshape(h, w)
    return GainMap((0.0, 0.0), resolution, w, h, values, (txx, txy), method)


def save_map_csv(gmap: GainMap, path) -> None:
    """Row-major x,y,gain_db rows with exact decimal text."""
    centers = gmap.cell_centers()
    flat = gmap.values.ravel()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(MAP_CSV_HEADER + "\n")
        for (x, y), g in zip(centers, flat):
            fh.write(f"{fmt_float(x)},{fmt_float(y)},{fmt_float(g)}\n")


def load_map_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Returns (centers (n, 2), gains (n,)) from a map CSV."""
    xs, ys, gs = [], [], []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != MAP_CSV_HEADER:
            raise ValueError(f"unexpected map header {header!r}, want {MAP_CSV_HEADER!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            x, y, g = line.split(",")
            xs.append(float(x))
            ys.append(float(y))
            gs.append(float(g))
    if not xs:
        raise ValueError(f"map file {path} has no rows")
    return np.column_stack([xs, ys]), np.array(gs)


def save_map_pgm(gmap: GainMap, path) -> None:
    """16-bit binary PGM; gains map linearly onto [0, 65535] (flat maps go to 0)."""
    vmin = float(gmap.values.min())
    vmax = float(gmap.values.max())
    if vmax > vmin:
        scaled = np.round((gmap.values - vmin) / (vmax - vmin) * 65535.0)
    else:
        scaled = np.zeros_like(gmap.values)
    pixels = scaled.astype(">u2")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{gmap.width} {gmap.height}\n65535\n".encode("ascii"))
        fh.write(pixels.tobytes())
