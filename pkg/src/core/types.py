from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class ArmSpace:
    coordinates: np.ndarray  # [K], strictly increasing
    diameter: float

    def __post_init__(self) -> None:
        x = np.asarray(self.coordinates, dtype=np.float64)
        if x.ndim != 1 or x.shape[0] < 1:
            raise InputError("coordinates must be a non-empty 1-D array")
        if x.shape[0] > 1 and not np.all(np.diff(x) > 0):
            raise InputError("coordinates must be strictly increasing")
        if not self.diameter > 0:
            raise InputError("diameter must be positive")
        if x.shape[0] > 1 and (x[-1] - x[0]) > self.diameter * (1.0 + 1e-12):
            raise InputError("diameter smaller than the coordinate span")
        x.setflags(write=False)
        object.__setattr__(self, "coordinates", x)
        object.__setattr__(self, "diameter", float(self.diameter))

    @property
    def K(self) -> int:
        return int(self.coordinates.shape[0])

    @classmethod
    def grid(cls, K: int) -> "ArmSpace":
        """
        K cell-centred arms on [-1, 1] with spacing 2/K.
        The diameter is the interval length 2, so adjacent arms sit 1/K apart.
        """
        if K < 1:
            raise InputError("K must be >= 1")
        x = -1.0 + (2.0 * np.arange(K, dtype=np.float64) + 1.0) / K
        return cls(coordinates=x, diameter=2.0)

    @classmethod
    def from_coordinates(cls, coords: Sequence[float], diameter: Optional[float] = None) -> "ArmSpace":
        x = np.asarray(coords, dtype=np.float64)
        if diameter is None:
            span = float(x.max() - x.min()) if x.size else 0.0
            diameter = span if span > 0 else 1.0
        return cls(coordinates=x, diameter=diameter)

    def check_arm(self, arm: int) -> int:
        if not 0 <= int(arm) < self.K:
            raise InputError(f"arm index {arm} out of range [0, {self.K})")
        return int(arm)


@dataclass(frozen=True)
class Observation:
    arm: int
    x: float
    t: float
    y: float


@dataclass(frozen=True)
class PolicyDecision:
    arm: int
    index_values: Optional[np.ndarray] = None  # [K] scores at selection time
    propensities: Optional[np.ndarray] = field(default=None, compare=False)  # [K] pi_t(.)

    def propensity(self, arm: int) -> float:
        if self.propensities is None:
            return 1.0 if int(arm) == self.arm else 0.0
        return float(self.propensities[arm])


def argmax_lowest(values: np.ndarray) -> int:
    # np.argmax returns the first maximum, which is the lowest index on ties
    return int(np.argmax(values))
