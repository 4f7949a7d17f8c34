from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Optional

import numpy as np

from .errors import PolicyStateError
from .types import ArmSpace, Observation, PolicyDecision


class BasePolicy(ABC):
    """
    Pull-based policy state machine.

    - step(): the per-round contract. Checks that the feedback belongs to the
      previously issued decision, absorbs it, then selects.
    - observe(): absorbs an arbitrary observation (warm-up rounds, log replay).
    - select(): the policy-specific selection rule.

    One instance per run; never shared between threads.
    """

    name = "base"

    def __init__(self, space: ArmSpace, rng: Optional[np.random.Generator] = None):
        self.space = space
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self._pending: Optional[PolicyDecision] = None
        self._last_t = -np.inf

    @property
    def K(self) -> int:
        return self.space.K

    def step(self, round_idx: int, t: float, feedback: Optional[Observation] = None) -> PolicyDecision:
        if feedback is not None:
            self._check_feedback(feedback, t)
            self.observe(feedback)
        decision = self.select(round_idx, t)
        self._pending = decision
        return decision

    def observe(self, obs: Observation) -> None:
        self.space.check_arm(obs.arm)
        self._last_t = max(self._last_t, float(obs.t))
        self._absorb(obs)

    @abstractmethod
    def _absorb(self, obs: Observation) -> None:
        ...

    @abstractmethod
    def select(self, round_idx: int, t: float) -> PolicyDecision:
        ...

    def _check_feedback(self, obs: Observation, t_now: float) -> None:
        if self._pending is None:
            raise PolicyStateError("feedback received but no decision was issued")
        if obs.arm != self._pending.arm:
            raise PolicyStateError(f"feedback arm {obs.arm} != issued arm {self._pending.arm}")
        if obs.x != self.space.coordinates[obs.arm]:
            raise PolicyStateError(f"feedback coordinate {obs.x} does not match arm {obs.arm}")
        if obs.t < self._last_t or obs.t > t_now:
            raise PolicyStateError(f"feedback time {obs.t} outside [{self._last_t}, {t_now}]")
        self._pending = None
