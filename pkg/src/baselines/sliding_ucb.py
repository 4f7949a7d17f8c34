from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.core.errors import InputError
from src.core.policy import BasePolicy
from src.core.types import ArmSpace, Observation, PolicyDecision, argmax_lowest


@dataclass(frozen=True)
class SlidingUcbParams:
    window: int = 100
    xi: float = 0.5
    B: float = 1.0

    def __post_init__(self) -> None:
        if self.window < 1:
            raise InputError("window must be >= 1")
        if not self.xi > 0:
            raise InputError("xi must be > 0")


def sliding_ucb_step(params: SlidingUcbParams, window: Sequence[Observation], K: int,
                     round_idx: int) -> PolicyDecision:
    arms = np.array([o.arm for o in window], dtype=np.int64)
    ys = np.array([o.y for o in window], dtype=np.float64)
    n = np.bincount(arms, minlength=K).astype(np.float64)
    unseen = np.flatnonzero(n == 0)
    if unseen.size:
        return PolicyDecision(arm=int(unseen[0]))

    sums = np.bincount(arms, weights=ys, minlength=K)
    t = max(round_idx + 1, 1)
    idx = sums / n + params.B * np.sqrt(params.xi * math.log(t) / n)
    return PolicyDecision(arm=argmax_lowest(idx), index_values=idx)


class SlidingUcbPolicy(BasePolicy):
    name = "sliding_ucb"

    def __init__(self, space: ArmSpace, params: Optional[SlidingUcbParams] = None,
                 rng: Optional[np.random.Generator] = None):
        super().__init__(space, rng)
        self.params = params or SlidingUcbParams()
        self.window: deque[Observation] = deque(maxlen=self.params.window)

    def _absorb(self, obs: Observation) -> None:
        self.window.append(obs)

    def select(self, round_idx: int, t: float) -> PolicyDecision:
        return sliding_ucb_step(self.params, list(self.window), self.K, round_idx)
