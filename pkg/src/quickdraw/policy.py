from __future__ import annotations

from typing import Optional

import numpy as np

from src.core.policy import BasePolicy
from src.core.types import ArmSpace, Observation, PolicyDecision, argmax_lowest

from .posterior import QuickDrawParams, QuickDrawState, gamma_schedule, posterior, ucb_index


def current_gamma(state: QuickDrawState) -> float:
    p = state.params
    if p.gamma_mode == "fixed":
        return float(p.gamma)
    return gamma_schedule(p.L, p.delta, len(state) + 1, p)


def select_and_update(state: QuickDrawState, t: float) -> PolicyDecision:
    """One pass of the selection loop: posterior at t, clipped UCB, argmax."""
    summary = posterior(state, t)
    idx = ucb_index(summary, current_gamma(state), ceiling=state.params.ceiling)
    return PolicyDecision(arm=argmax_lowest(idx), index_values=idx)


class QuickDrawPolicy(BasePolicy):
    name = "quickdraw"

    def __init__(self, space: ArmSpace, params: Optional[QuickDrawParams] = None,
                 rng: Optional[np.random.Generator] = None):
        super().__init__(space, rng)
        self.params = params or QuickDrawParams()
        self.state = QuickDrawState(self.params, space)

    def _absorb(self, obs: Observation) -> None:
        self.state.add(obs)

    def select(self, round_idx: int, t: float) -> PolicyDecision:
        return select_and_update(self.state, t)
