from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.core.errors import InputError
from src.core.policy import BasePolicy
from src.core.types import ArmSpace, Observation, PolicyDecision


@dataclass(frozen=True)
class RestlessParams:
    sigma_r: float = 0.1

    def __post_init__(self) -> None:
        if not self.sigma_r > 0:
            raise InputError("sigma_r must be > 0")


def leader_of(last_y: np.ndarray) -> Optional[int]:
    if np.all(np.isnan(last_y)):
        return None
    return int(np.nanargmax(last_y))


def suspicions(params: RestlessParams, last_y: np.ndarray, last_t: np.ndarray, t: float) -> np.ndarray:
    """
    suspicion_j = y_j + sigma_r * sqrt(dt_j) - y_leader
    Never-observed arms get +inf.
    """
    leader = leader_of(last_y)
    out = np.full(last_y.shape, np.inf)
    if leader is None:
        return out
    seen = ~np.isnan(last_y)
    dt = np.maximum(t - last_t[seen], 0.0)
    out[seen] = last_y[seen] + params.sigma_r * np.sqrt(dt) - last_y[leader]
    return out


def restless_step(params: RestlessParams, last_y: np.ndarray, last_t: np.ndarray,
                  round_idx: int, t: float, rng: np.random.Generator) -> PolicyDecision:
    """
    Strict alternation: even rounds exploit the leader, odd rounds play a uniform
    draw among arms with positive suspicion, falling back to the leader.
    Random draws report their uniform propensities.
    """
    K = last_y.shape[0]
    leader = leader_of(last_y)
    if leader is None:
        return PolicyDecision(arm=int(rng.integers(K)), propensities=np.full((K,), 1.0 / K))
    if round_idx % 2 == 0:
        return PolicyDecision(arm=leader)

    s = suspicions(params, last_y, last_t, t)
    candidates = np.flatnonzero(s > 0)
    if candidates.size == 0:
        return PolicyDecision(arm=leader, index_values=s)
    arm = int(candidates[int(rng.integers(candidates.size))])
    probs = np.zeros((K,))
    probs[candidates] = 1.0 / candidates.size
    return PolicyDecision(arm=arm, index_values=s, propensities=probs)


class RestlessPolicy(BasePolicy):
    name = "restless"

    def __init__(self, space: ArmSpace, params: Optional[RestlessParams] = None,
                 rng: Optional[np.random.Generator] = None):
        super().__init__(space, rng)
        self.params = params or RestlessParams()
        self.last_y = np.full((space.K,), np.nan)
        self.last_t = np.full((space.K,), -np.inf)

    def _absorb(self, obs: Observation) -> None:
        if obs.t >= self.last_t[obs.arm]:
            self.last_y[obs.arm] = obs.y
            self.last_t[obs.arm] = obs.t

    @property
    def leader(self) -> Optional[int]:
        return leader_of(self.last_y)

    def select(self, round_idx: int, t: float) -> PolicyDecision:
        return restless_step(self.params, self.last_y, self.last_t, round_idx, t, self.rng)
