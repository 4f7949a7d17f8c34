from __future__ import annotations

from typing import Optional

import numpy as np

from src.core.errors import InputError
from src.core.policy import BasePolicy
from src.core.types import ArmSpace, Observation, PolicyDecision, argmax_lowest


class OraclePolicy(BasePolicy):
    """
    Plays the best arm of a known mean grid mu [K, T].
    Column for time t is round(t / tau), clamped to the grid.
    """

    name = "oracle"

    def __init__(self, space: ArmSpace, mu: np.ndarray, tau: float,
                 rng: Optional[np.random.Generator] = None):
        super().__init__(space, rng)
        if mu.shape[0] != space.K:
            raise InputError("mean grid rows must match the arm count")
        self.mu = mu
        self.tau = float(tau)

    def _absorb(self, obs: Observation) -> None:
        pass

    def column(self, t: float) -> int:
        col = int(round(t / self.tau))
        return min(max(col, 0), self.mu.shape[1] - 1)

    def select(self, round_idx: int, t: float) -> PolicyDecision:
        values = self.mu[:, self.column(t)]
        return PolicyDecision(arm=argmax_lowest(values), index_values=values)
