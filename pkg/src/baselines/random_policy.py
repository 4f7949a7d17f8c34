from __future__ import annotations

import numpy as np

from src.core.policy import BasePolicy
from src.core.types import Observation, PolicyDecision


class RandomPolicy(BasePolicy):
    name = "random"

    def _absorb(self, obs: Observation) -> None:
        pass

    def select(self, round_idx: int, t: float) -> PolicyDecision:
        arm = int(self.rng.integers(self.K))
        return PolicyDecision(arm=arm, propensities=np.full((self.K,), 1.0 / self.K))
