"""Deterministic ground-truth channel-gain oracle: log-distance trend, wall losses,
and an optional spatially correlated shadowing field."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .env import Environment, Obstacle
from .validation import as_xy, check_link_coords

SHADOWING_LATTICE_PITCH = 5.0  # metres between shadowing lattice nodes


@dataclass(frozen=True)
class PropagationParams:
    """Oracle constants. Gains are -(path loss); distances clamped below at d_min."""

    pl0_db: float = 40.0            # path loss at the 1 m reference distance
    exponent: float = 3.0
    shadowing_sigma_db: float = 4.0  # 0 disables shadowing
    shadowing_corr_len: float = 25.0
    d_min: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not self.pl0_db > 0:
            raise ValueError(f"pl0_db must be > 0, got {self.pl0_db}")
        if not self.exponent > 0:
            raise ValueError(f"exponent must be > 0, got {self.exponent}")
        if self.shadowing_sigma_db < 0:
            raise ValueError(f"shadowing_sigma_db must be >= 0, got {self.shadowing_sigma_db}")
        if self.shadowing_sigma_db > 0 and not self.shadowing_corr_len > 0:
            raise ValueError(f"shadowing_corr_len must be > 0, got {self.shadowing_corr_len}")
        if not self.d_min > 0:
            raise ValueError(f"d_min must be > 0, got {self.d_min}")


def _segment_box_penetration(p: np.ndarray, q: np.ndarray, obs: Obstacle) -> np.ndarray:
    """True where the open segment p->q meets the obstacle's interior over positive length.

    Parametric slab clipping against the OPEN rectangle: grazing a corner or sliding
    along an edge yields a zero-length (or boundary-only) overlap and does not count.
    p, q: (n, 2) segment endpoints.
    """
    t_lo = np.zeros(p.shape[0])
    t_hi = np.ones(p.shape[0])
    for axis, (lo, hi) in enumerate(((obs.x_min, obs.x_max), (obs.y_min, obs.y_max))):
        a = p[:, axis]
        d = q[:, axis] - a
        with np.errstate(divide="ignore", invalid="ignore"):
            ta = (lo - a) / d
            tb = (hi - a) / d
        enter = np.minimum(ta, tb)
        leave = np.maximum(ta, tb)
        parallel = d == 0.0
        inside_slab = (lo < a) & (a < hi)
        # Parallel to the slab: the whole segment is in iff strictly inside, else out.
        enter = np.where(parallel, np.where(inside_slab, -np.inf, np.inf), enter)
        leave = np.where(parallel, np.where(inside_slab, np.inf, -np.inf), leave)
        t_lo = np.maximum(t_lo, enter)
        t_hi = np.minimum(t_hi, leave)
    return t_hi > t_lo


def count_obstructions_many(env: Environment, coords: np.ndarray) -> np.ndarray:
    """Number of distinct obstacles each link (tx_x, tx_y, rx_x, rx_y) penetrates."""
    coords = check_link_coords(coords)
    counts = np.zeros(coords.shape[0], dtype=int)
    p = coords[:, 0:2]
    q = coords[:, 2:4]
    for obs in env.obstacles:
        counts += _segment_box_penetration(p, q, obs)
    return counts


def count_obstructions(env: Environment, tx, rx) -> int:
    """Scalar wrapper over :func:`count_obstructions_many`."""
    txx, txy = env.require_inside(tx, "tx")
    rxx, rxy = env.require_inside(rx, "rx")
    return int(count_obstructions_many(env, np.array([[txx, txy, rxx, rxy]]))[0])


def wall_loss_many(env: Environment, coords: np.ndarray) -> np.ndarray:
    """Summed wall loss (dB) over the obstacles each link penetrates."""
    coords = check_link_coords(coords)
    loss = np.zeros(coords.shape[0])
    p = coords[:, 0:2]
    q = coords[:, 2:4]
    for obs in env.obstacles:
        loss += np.where(_segment_box_penetration(p, q, obs), obs.wall_loss_db, 0.0)
    return loss


class ShadowingField:
    """Seeded, spatially correlated Gaussian field on a regular lattice over the RoI.

    Node values have standard deviation sigma and Gaussian-kernel correlation
    exp(-d^2 / (2 * corr_len^2)); queries interpolate bilinearly between nodes.
    The per-link term is the average of the field at the two endpoints, which
    makes it symmetric in (tx, rx) by construction.
    """

    def __init__(self, env: Environment, params: PropagationParams,
                 pitch: float = SHADOWING_LATTICE_PITCH):
        self.sigma = params.shadowing_sigma_db
        self.pitch = pitch
        if self.sigma == 0.0:
            self.z = None
            return
        nx = int(math.ceil(env.roi_width / pitch)) + 1
        ny = int(math.ceil(env.roi_height / pitch)) + 1
        xs = np.arange(nx) * pitch
        ys = np.arange(ny) * pitch
        rng = np.random.default_rng(params.seed)
        # The Gaussian kernel is separable on a regular lattice, so the 2-D field
        # factors into per-axis square roots: Z = sigma * Lx @ E @ Ly.T.
        lx = self._axis_factor(xs, params.shadowing_corr_len)
        ly = self._axis_factor(ys, params.shadowing_corr_len)
        eps = rng.standard_normal((nx, ny))
        self.z = self.sigma * (lx @ eps @ ly.T)  # indexed [ix, iy]
        self.nx, self.ny = nx, ny

    @staticmethod
    def _axis_factor(coords: np.ndarray, corr_len: float) -> np.ndarray:
        """Symmetric square root of the 1-D unit-variance Gaussian-kernel covariance."""
        d = coords[:, None] - coords[None, :]
        c = np.exp(-0.5 * (d / corr_len) ** 2)
        # eigh with clipping: the kernel matrix is severely ill-conditioned when the
        # pitch is much smaller than corr_len, so Cholesky is not reliable here.
        w, v = np.linalg.eigh(c)
        return v * np.sqrt(np.clip(w, 0.0, None))

    def node_values(self) -> np.ndarray:
        """Lattice node values (nx, ny); zeros-shaped None when disabled."""
        return self.z

    def at_points(self, pts: np.ndarray) -> np.ndarray:
        """Bilinear field value at each (x, y) row of pts."""
        if self.z is None:
            return np.zeros(pts.shape[0])
        fx = np.clip(pts[:, 0] / self.pitch, 0.0, self.nx - 1.0)
        fy = np.clip(pts[:, 1] / self.pitch, 0.0, self.ny - 1.0)
        ix = np.minimum(fx.astype(int), self.nx - 2) if self.nx > 1 else np.zeros(len(fx), int)
        iy = np.minimum(fy.astype(int), self.ny - 2) if self.ny > 1 else np.zeros(len(fy), int)
        ux = fx - ix
        uy = fy - iy
        z = self.z
        if self.nx == 1:
            z = np.vstack([z, z])
        if self.ny == 1:
            z = np.hstack([z, z])
        return ((1 - ux) * (1 - uy) * z[ix, iy]
                + ux * (1 - uy) * z[ix + 1, iy]
                + (1 - ux) * uy * z[ix, iy + 1]
                + ux * uy * z[ix + 1, iy + 1])

    def link_term(self, coords: np.ndarray) -> np.ndarray:
        """Per-link shadowing: mean of the endpoint field values."""
        if self.z is None:
            return np.zeros(coords.shape[0])
        return 0.5 * (self.at_points(coords[:, 0:2]) + self.at_points(coords[:, 2:4]))


def shadowing_field(env: Environment, params: PropagationParams) -> ShadowingField:
    """Build the seeded shadowing field sampler for (env, params)."""
    return ShadowingField(env, params)


class ChannelOracle:
    """Ground-truth gain evaluator for one (environment, params) pair.

    gain = -(pl0 + 10 * exponent * log10(max(d, d_min)) + wall losses + shadowing).
    Construction realizes the shadowing lattice once; evaluation is pure after that.
    """

    def __init__(self, env: Environment, params: PropagationParams | None = None):
        self.env = env
        self.params = params if params is not None else PropagationParams()
        self.field = ShadowingField(env, self.params)

    def predict(self, X) -> np.ndarray:
        """Gains (dB) for link coordinate rows (tx_x, tx_y, rx_x, rx_y)."""
        X = check_link_coords(X)
        for i in range(X.shape[0]):
            if not (self.env.inside_roi(X[i, 0], X[i, 1])
                    and self.env.inside_roi(X[i, 2], X[i, 3])):
                raise ValueError(f"link {i} has an endpoint outside the RoI")
        p = self.params
        d = np.hypot(X[:, 2] - X[:, 0], X[:, 3] - X[:, 1])
        d = np.maximum(d, p.d_min)
        loss = (p.pl0_db
                + 10.0 * p.exponent * np.log10(d)
                + wall_loss_many(self.env, X)
                + self.field.link_term(X))
        return -loss

    def gain(self, tx, rx) -> float:
        txx, txy = as_xy(tx)
        rxx, rxy = as_xy(rx)
        return float(self.predict(np.array([[txx, txy, rxx, rxy]]))[0])


def true_gain(env: Environment, params: PropagationParams, tx, rx) -> float:
    """One-off oracle evaluation; builds the shadowing field each call.

    Use :class:`ChannelOracle` directly when evaluating many links.
    """
    return ChannelOracle(env, params).gain(tx, rx)
