from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.core.errors import InputError
from src.core.policy import BasePolicy
from src.core.types import ArmSpace, Observation, PolicyDecision


@dataclass(frozen=True)
class SlidingGreedyParams:
    epsilon: float = 0.1
    window: int = 100

    def __post_init__(self) -> None:
        if not 0.0 <= self.epsilon <= 1.0:
            raise InputError("epsilon must lie in [0, 1]")
        if self.window < 1:
            raise InputError("window must be >= 1")


def greedy_arm(window: Sequence[Observation]) -> Optional[int]:
    """Arm of the highest reward in the window; ties go to the most recent."""
    if not window:
        return None
    ys = np.array([o.y for o in window], dtype=np.float64)
    newest_first = ys[::-1]
    pos = len(ys) - 1 - int(np.argmax(newest_first))
    return int(window[pos].arm)


def sliding_greedy_step(params: SlidingGreedyParams, window: Sequence[Observation],
                        rng: np.random.Generator, K: int) -> PolicyDecision:
    # one uniform draw every round keeps the stream position independent of the branch
    u = float(rng.random())
    best = greedy_arm(window)
    if best is None:
        return PolicyDecision(arm=int(rng.integers(K)), propensities=np.full((K,), 1.0 / K))

    probs = np.full((K,), params.epsilon / K)
    probs[best] += 1.0 - params.epsilon
    if u < params.epsilon:
        arm = int(rng.integers(K))
    else:
        arm = best
    return PolicyDecision(arm=arm, propensities=probs)


class SlidingGreedyPolicy(BasePolicy):
    name = "greedy"

    def __init__(self, space: ArmSpace, params: Optional[SlidingGreedyParams] = None,
                 rng: Optional[np.random.Generator] = None):
        super().__init__(space, rng)
        self.params = params or SlidingGreedyParams()
        self.window: deque[Observation] = deque(maxlen=self.params.window)

    def _absorb(self, obs: Observation) -> None:
        self.window.append(obs)

    def select(self, round_idx: int, t: float) -> PolicyDecision:
        return sliding_greedy_step(self.params, list(self.window), self.rng, self.K)
