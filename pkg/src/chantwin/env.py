"""Synthetic 2-D environment: region of interest, rectangular obstacles, access points."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .validation import as_xy

# Obstacle side lengths drawn from this range (metres).
OBSTACLE_SIDE_MIN = 5.0
OBSTACLE_SIDE_MAX = 30.0
DEFAULT_WALL_LOSS_DB = 20.0

# Give up on AP placement after this many rejection-sampling draws.
MAX_PLACEMENT_ATTEMPTS = 10_000


@dataclass(frozen=True)
class Position:
    """A point in the RoI, metres."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"position coordinates must be finite, got ({self.x}, {self.y})")

    def __iter__(self):
        yield self.x
        yield self.y


@dataclass(frozen=True)
class Obstacle:
    """Axis-aligned rectangle that attenuates every link crossing its interior."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float
    wall_loss_db: float = DEFAULT_WALL_LOSS_DB

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(
                f"obstacle must satisfy x_min < x_max and y_min < y_max, got "
                f"[{self.x_min}, {self.x_max}] x [{self.y_min}, {self.y_max}]"
            )
        if self.wall_loss_db < 0:
            raise ValueError(f"wall_loss_db must be >= 0, got {self.wall_loss_db}")

    def contains(self, x: float, y: float) -> bool:
        """Closed-rectangle membership test."""
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


@dataclass
class Environment:
    """The scene a gain twin mirrors: RoI bounds, obstacles, and AP placements."""

    roi_width: float
    roi_height: float
    obstacles: list[Obstacle] = field(default_factory=list)
    aps: list[Position] = field(default_factory=list)
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not (self.roi_width > 0 and self.roi_height > 0):
            raise ValueError(f"RoI sides must be positive, got {self.roi_width}x{self.roi_height}")
        for i, ap in enumerate(self.aps):
            if not self.inside_roi(ap.x, ap.y):
                raise ValueError(f"AP {i} at ({ap.x}, {ap.y}) lies outside the RoI")
            for j, obs in enumerate(self.obstacles):
                if obs.contains(ap.x, ap.y):
                    raise ValueError(f"AP {i} at ({ap.x}, {ap.y}) lies inside obstacle {j}")

    def inside_roi(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.roi_width and 0.0 <= y <= self.roi_height

    def require_inside(self, pos, name: str = "position") -> tuple[float, float]:
        x, y = as_xy(pos)
        if not self.inside_roi(x, y):
            raise ValueError(f"{name} ({x}, {y}) is outside the RoI "
                             f"[0, {self.roi_width}] x [0, {self.roi_height}]")
        return x, y

    def ap_array(self) -> np.ndarray:
        """AP coordinates as an (n_aps, 2) array."""
        return np.array([[ap.x, ap.y] for ap in self.aps], dtype=float).reshape(-1, 2)

    def to_dict(self) -> dict:
        return {
            "roi": {"width": self.roi_width, "height": self.roi_height},
            "obstacles": [
                {
                    "x_min": o.x_min,
                    "y_min": o.y_min,
                    "x_max": o.x_max,
                    "y_max": o.y_max,
                    "wall_loss_db": o.wall_loss_db,
                }
                for o in self.obstacles
            ],
            "aps": [[ap.x, ap.y] for ap in self.aps],
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Environment":
        try:
            roi = d["roi"]
            obstacles = [
                Obstacle(o["x_min"], o["y_min"], o["x_max"], o["y_max"], o["wall_loss_db"])
                for o in d["obstacles"]
            ]
            aps = [Position(float(p[0]), float(p[1])) for p in d["aps"]]
            return cls(
                roi_width=float(roi["width"]),
                roi_height=float(roi["height"]),
                obstacles=obstacles,
                aps=aps,
                seed=int(d["seed"]),
            )
        except (KeyError, TypeError, IndexError) as exc:
            raise ValueError(f"malformed environment file: {exc}") from exc


def generate_environment(
    seed: int,
    n_obstacles: int,
    n_aps: int,
    roi_width: float,
    roi_height: float,
    wall_loss_db: float = DEFAULT_WALL_LOSS_DB,
) -> Environment:
    """Seeded-random scene: rectangular obstacles fully inside the RoI, APs outside them.

    Obstacle side lengths are uniform in [5, 30] m (clipped to the RoI side when the
    RoI is narrower than 30 m); obstacles may overlap. APs are rejection-sampled
    uniformly over the RoI until each lands outside every obstacle.
    """
    if n_aps < 1:
        raise ValueError(f"n_aps must be >= 1, got {n_aps}")
    if n_obstacles < 0:
        raise ValueError(f"n_obstacles must be >= 0, got {n_obstacles}")
    if not (roi_width > 0 and roi_height > 0):
        raise ValueError(f"RoI sides must be positive, got {roi_width}x{roi_height}")
    if n_obstacles > 0 and min(roi_width, roi_height) < OBSTACLE_SIDE_MIN:
        raise ValueError(
            f"RoI sides must be >= {OBSTACLE_SIDE_MIN} m to fit obstacles, "
            f"got {roi_width}x{roi_height}"
        )

    rng = np.random.default_rng(seed)
    obstacles = []
    w_hi = min(OBSTACLE_SIDE_MAX, roi_width)
    h_hi = min(OBSTACLE_SIDE_MAX, roi_height)
    for _ in range(n_obstacles):
        w = rng.uniform(OBSTACLE_SIDE_MIN, w_hi)
        h = rng.uniform(OBSTACLE_SIDE_MIN, h_hi)
        x0 = rng.uniform(0.0, roi_width - w)
        y0 = rng.uniform(0.0, roi_height - h)
        obstacles.append(Obstacle(x0, y0, x0 + w, y0 + h, wall_loss_db))

    aps = []
    for i in range(n_aps):
        for _ in range(MAX_PLACEMENT_ATTEMPTS):
            x = rng.uniform(0.0, roi_width)
            y = rng.uniform(0.0, roi_height)
            if not any(o.contains(x, y) for o in obstacles):
                aps.append(Position(x, y))
                break
        else:
            raise RuntimeError(
                f"could not place AP {i} outside all obstacles after "
                f"{MAX_PLACEMENT_ATTEMPTS} attempts (RoI saturated)"
            )

    return Environment(roi_width, roi_height, obstacles, aps, seed)


def save_environment(env: Environment, path) -> None:
    """Write an environment as JSON; floats use shortest round-trip decimal text."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(env.to_dict(), fh, indent=2)
        fh.write("\n")


def load_environment(path) -> Environment:
    """Read and re-validate an environment; raises on parse or invariant errors."""
    with open(path, "r", encoding="utf-8") as fh:
        d = json.load(fh)
    return Environment.from_dict(d)
