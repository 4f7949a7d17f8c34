from __future__ import annotations

import dataclasses
import math

import numpy as np

from src.core.seeding import child_rng
from src.core.types import Observation
from src.envgen.field import FieldParams, empirical_lipschitz, observe, sample_field
from src.quickdraw.policy import QuickDrawPolicy, current_gamma
from src.quickdraw.posterior import QuickDrawParams, posterior


def concentration_holds(field_params: FieldParams, params: QuickDrawParams, seed: int) -> bool:
    """
    Play theoretical-gamma Quick-Draw on a stationary field and check, after
    every round T, that |mu(x) - mu_hat_T(x)| <= gamma_{T+1} * Sigma_T(x) at every arm.
    """
    fp = dataclasses.replace(field_params, seed=seed, rho_t=math.inf)
    field = sample_field(fp)
    if params.gamma_mode == "theoretical":
        params = dataclasses.replace(params, L=max(empirical_lipschitz(field), 1e-12))
    space = field.space
    policy = QuickDrawPolicy(space, params, child_rng(seed, "policy", "quickdraw"))
    noise = child_rng(seed, "noise", "quickdraw")
    times = fp.times()
    for r in range(fp.T):
        t = float(times[r])
        # select + observe instead of step: the posterior is inspected between rounds
        decision = policy.select(r, t)
        y = observe(field, decision.arm, r, noise)
        policy.observe(Observation(decision.arm, float(space.coordinates[decision.arm]), t, y))
        summary = posterior(policy.state, t)
        bound = current_gamma(policy.state) * summary.sigma_hat
        if np.any(np.abs(field.mu[:, r] - summary.mu_hat) > bound):
            return False
    return True


def coverage_rate(field_params: FieldParams, params: QuickDrawParams, n_reps: int, seed_base: int = 0) -> float:
    hits = sum(concentration_holds(field_params, params, seed_base + i) for i in range(n_reps))
    return hits / n_reps
