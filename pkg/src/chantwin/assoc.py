"""Twin-aware user association: rank APs for a UE by predicted gain or by distance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .env import Environment
from .validation import as_xy


@dataclass
class AssociationResult:
    ue: tuple[float, float]
    selected: list[tuple[int, float]]  # (ap_index, score) ordered best-first
    criterion: str                     # "gain" or "distance"

    @property
    def indices(self) -> list[int]:
        return [i for i, _ in self.selected]


def _check_k(env: Environment, k: int) -> None:
    if not 1 <= k <= len(env.aps):
        raise ValueError(f"k must be in [1, {len(env.aps)}], got {k}")


def associate_by_gain(env: Environment, predictor, ue, k: int = 5) -> AssociationResult:
    """Top-k APs by predicted gain (descending); exact ties go to the lower AP index.

    ``predictor`` is anything exposing predict((n, 4) link coords) -> gains, e.g.
    the oracle, the MLP twin, an SI interpolator over 4-D pairs, or the PL fit.
    """
    _check_k(env, k)
    ux, uy = env.require_inside(ue, "ue")
    aps = env.ap_array()
    links = np.hstack([aps, np.tile([[ux, uy]], (aps.shape[0], 1))])
    scores = np.asarray(predictor.predict(links), dtype=float)
    order = np.lexsort((np.arange(len(scores)), -scores))
    selected = [(int(i), float(scores[i])) for i in order[:k]]
    return AssociationResult((ux, uy), selected, "gain")


def associate_by_distance(env: Environment, ue, k: int = 5) -> AssociationResult:
    """k nearest APs (ascending distance); exact ties go to the lower AP index."""
    _check_k(env, k)
    ux, uy = env.require_inside(ue, "ue")
    aps = env.ap_array()
    d = np.hypot(aps[:, 0] - ux, aps[:, 1] - uy)
    order = np.lexsort((np.arange(len(d)), d))
    selected = [(int(i), float(d[i])) for i in order[:k]]
    return AssociationResult((ux, uy), selected, "distance")
