from __future__ import annotations

import numpy as np

from .types import ArmSpace


def normalized_distance(space: ArmSpace, i: int, j: int) -> float:
    i = space.check_arm(i)
    j = space.check_arm(j)
    return float(abs(space.coordinates[i] - space.coordinates[j]) / space.diameter)


def distances_to(space: ArmSpace, x: np.ndarray) -> np.ndarray:
    """
    Normalized distance from every arm to each point in x.
    x: [n] raw coordinates
    returns: [K, n]
    """
    x = np.asarray(x, dtype=np.float64)
    return np.abs(space.coordinates[:, None] - x[None, :]) / space.diameter

