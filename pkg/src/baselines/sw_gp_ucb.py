from __future__ import annotations

from collections import deque
from typing import Optional, Sequence, Union

import numpy as np

from src.core.policy import BasePolicy
from src.core.types import ArmSpace, Observation, PolicyDecision, argmax_lowest

from .gp import GpParams, fit_hyperparameters, gp_posterior


def sw_gp_ucb_step(params: GpParams, window: Sequence[Observation], space: ArmSpace,
                   round_idx: int) -> PolicyDecision:
    u_obs = np.array([o.x for o in window], dtype=np.float64) / space.diameter
    y_obs = np.array([o.y for o in window], dtype=np.float64)
    kernel, noise = params.kernel, params.noise
    if params.hyperopt is not None and len(window) > 0:
        kernel, noise = fit_hyperparameters(params.hyperopt, u_obs, y_obs)
    mean, var = gp_posterior(kernel, noise, u_obs, y_obs, space.coordinates / space.diameter)
    idx = mean + np.sqrt(params.ucb_beta) * np.sqrt(var)
    return PolicyDecision(arm=argmax_lowest(idx), index_values=idx)


class SwGpUcbPolicy(BasePolicy):
    name = "sw_gp_ucb"

    def __init__(self, space: ArmSpace, params: Optional[GpParams] = None,
                 rng: Optional[np.random.Generator] = None):
        super().__init__(space, rng)
        self.params = params or GpParams()
        self.window: Union[deque, list] = (
            deque(maxlen=self.params.window) if self.params.window is not None else []
        )

    def _absorb(self, obs: Observation) -> None:
        self.window.append(obs)

    def select(self, round_idx: int, t: float) -> PolicyDecision:
        return sw_gp_ucb_step(self.params, list(self.window), self.space, round_idx)
