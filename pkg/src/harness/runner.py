from __future__ import annotations

import dataclasses
import logging
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from src.core.errors import PolicyStateError
from src.core.seeding import child_rng
from src.core.types import Observation
from src.envgen.field import PayoutField, observe, sample_field

from .config import ExperimentConfig, PolicySpec
from .policies import make_policy

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunResult:
    policy: str
    seed: int
    warmup: int
    arms: np.ndarray       # [T]
    rewards: np.ndarray    # [T]
    regrets: np.ndarray    # [T] mu(best) - mu(chosen), warm-up rounds included
    wall_time: np.ndarray  # [T] seconds spent in policy.step, 0 during warm-up
    times: np.ndarray      # [T]

    @property
    def T(self) -> int:
        return int(self.arms.shape[0])

    @property
    def cumulative_regret(self) -> float:
        return float(self.regrets[self.warmup:].sum())

    @property
    def mean_regret(self) -> float:
        return self.cumulative_regret / max(self.T - self.warmup, 1)

    def cumulative_at(self, T: int) -> float:
        return float(self.regrets[self.warmup:T].sum())

    def trace_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "round": np.arange(self.T),
            "t": self.times,
            "arm": self.arms,
            "y": self.rewards,
            "regret": self.regrets,
        })


def warmup_plan(seed: int, warmup: int, K: int):
    """Warm-up arms and noise draws shared by every policy at this seed."""
    rng = child_rng(seed, "warmup")
    arms = rng.integers(K, size=warmup)
    noise = rng.standard_normal(warmup)
    return arms, noise


def run_once(config: ExperimentConfig, spec: PolicySpec, seed: int,
             field: Optional[PayoutField] = None) -> RunResult:
    """
    One rollout: `warmup_rounds` random rounds fed to the policy as history,
    then the policy plays the remaining rounds. Regret is measured on mu.
    """
    if field is None:
        field = sample_field(dataclasses.replace(config.field, seed=seed))
    space = field.space
    K, T = field.K, field.T
    W = config.warmup_rounds
    sigma = field.params.sigma_noise
    times = field.params.times()

    policy = make_policy(spec, space, child_rng(seed, "policy", spec.name), mu=field.mu, tau=field.params.tau_s)
    noise_rng = child_rng(seed, "noise", spec.name)
    warm_arms, warm_noise = warmup_plan(seed, W, K)
    best = field.mu.max(axis=0)

    arms = np.zeros((T,), dtype=np.int64)
    rewards = np.zeros((T,), dtype=np.float64)
    wall = np.zeros((T,), dtype=np.float64)
    feedback: Optional[Observation] = None

    for r in range(T):
        t = float(times[r])
        if r < W:
            arm = int(warm_arms[r])
            y = float(field.mu[arm, r]) + sigma * float(warm_noise[r])
            policy.observe(Observation(arm=arm, x=float(space.coordinates[arm]), t=t, y=y))
        else:
            t0 = time.perf_counter()
            try:
                decision = policy.step(r, t, feedback)
            except PolicyStateError as e:
                raise PolicyStateError(f"{spec.name} seed={seed} round={r}: {e}") from e
            wall[r] = time.perf_counter() - t0
            arm = decision.arm
            y = observe(field, arm, r, noise_rng)
            feedback = Observation(arm=arm, x=float(space.coordinates[arm]), t=t, y=y)
        arms[r] = arm
        rewards[r] = y

    regrets = best - field.mu[arms, np.arange(T)]
    return RunResult(policy=spec.name, seed=seed, warmup=W, arms=arms, rewards=rewards,
                     regrets=regrets, wall_time=wall, times=times)
