from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Union

import numpy as np

from src.core.errors import InputError
from src.core.seeding import child_rng
from src.envgen.field import FieldParams, sample_field

from .events import LoggedEvent
from .segment import ReplaySegment

log = logging.getLogger(__name__)


def drifting_ctr_means(K: int, n_grid: int, seed: int, rho_x: float = 0.1, rho_t: float = 0.1,
                       alpha: float = 1.0, ctr_max: float = 0.1) -> np.ndarray:
    """
    Click-probability surface [K, n_grid] over rescaled time [0, 1]:
    a payout field scaled into [0, ctr_max].
    """
    if not 0.0 <= ctr_max <= 1.0:
        raise InputError("ctr_max must lie in [0, 1]")
    tau = 1.0 / (n_grid - 1) if n_grid > 1 else 1.0
    fp = FieldParams(rho_x=rho_x, rho_t=rho_t, alpha=alpha, K=K, T=n_grid, tau_s=tau, seed=seed)
    return ctr_max * sample_field(fp).mu


def moving_bump_means(K: int, n_grid: int, ctr_max: float = 0.95) -> np.ndarray:
    """
    Click-probability surface [K, n_grid] with a hot spot that drifts across
    the upper arms: a Gaussian bump of height ctr_max moving from arm 0.55K to
    0.85K, a flat plateau at ctr_max/4 on the lowest 40% of arms and a floor of
    ctr_max/100 elsewhere.
    """
    if not 0.0 <= ctr_max <= 1.0:
        raise InputError("ctr_max must lie in [0, 1]")
    t = np.linspace(0.0, 1.0, n_grid) if n_grid > 1 else np.zeros((1,))
    k = np.arange(K, dtype=np.float64)[:, None]
    centre = K * (0.55 + 0.30 * t)[None, :]
    width = max(K / 15.0, 0.5)
    floor = ctr_max / 100.0
    grid = floor + (ctr_max - floor) * np.exp(-0.5 * np.square((k - centre) / width))
    grid[: int(0.4 * K)] = ctr_max / 4.0
    return grid


SURFACES = ("field", "bump")


@dataclass(frozen=True)
class SyntheticLog:
    events: List[LoggedEvent]
    means: Dict[str, np.ndarray]   # group key -> [K, n_grid] click probability
    item_features: np.ndarray      # [K] raw feature of each action

    @property
    def K(self) -> int:
        return int(self.item_features.shape[0])

    @property
    def tau(self) -> float:
        n_grid = next(iter(self.means.values())).shape[1]
        return 1.0 / (n_grid - 1) if n_grid > 1 else 1.0

    def column(self, t: float) -> int:
        n_grid = next(iter(self.means.values())).shape[1]
        return min(max(int(round(t / self.tau)), 0), n_grid - 1)

    def oracle_grid(self, seg: ReplaySegment) -> np.ndarray:
        """Mean grid over the segment's arms, for the oracle target policy."""
        grid = self.means[seg.key]
        return np.stack([grid[list(acts)].mean(axis=0) for acts in seg.arm_actions])


def _as_grid(means: np.ndarray, K: int) -> np.ndarray:
    m = np.asarray(means, dtype=np.float64)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2 or m.shape[0] != K:
        raise InputError(f"means must have shape [K] or [K, n_grid] with K={K}")
    if np.any(m < 0.0) or np.any(m > 1.0):
        raise InputError("means must lie in [0, 1]")
    return m


def synth_log(K: int, T: int, seed: int = 0, means: Optional[Union[np.ndarray, Dict[str, np.ndarray]]] = None,
              n_groups: int = 1, n_grid: int = 200, ctr_max: float = 0.1,
              rho_x: float = 0.1, rho_t: float = 0.1, surface: str = "field") -> SyntheticLog:
    """
    Uniform-random logging over K actions (pscore = 1/K) with Bernoulli rewards.

    Event i happens at time i / (T - 1), so the log already spans [0, 1]; each
    event belongs to one of `n_groups` user groups, drawn uniformly. Without
    explicit `means` every group gets its own drifting click surface
    (surface 'field'), or all groups share the moving hot spot of
    `moving_bump_means` (surface 'bump').
    Action k has item feature k.
    """
    if K < 1 or T < 1 or n_groups < 1:
        raise InputError("K, T and n_groups must be >= 1")
    if surface not in SURFACES:
        raise InputError(f"surface must be one of {SURFACES}")
    keys = [str(g) for g in range(n_groups)]
    if means is None and surface == "bump":
        bump = moving_bump_means(K, n_grid, ctr_max=ctr_max)
        grids = {k: bump for k in keys}
    elif means is None:
        grids = {
            k: drifting_ctr_means(K, n_grid, int(child_rng(seed, "synth", "group", k).integers(2**31)),
                                  rho_x=rho_x, rho_t=rho_t, ctr_max=ctr_max)
            for k in keys
        }
    elif isinstance(means, dict):
        if sorted(means) != sorted(keys):
            raise InputError(f"means must cover groups {keys}")
        grids = {k: _as_grid(v, K) for k, v in means.items()}
    else:
        shared = _as_grid(means, K)
        grids = {k: shared for k in keys}
    if len({g.shape[1] for g in grids.values()}) != 1:
        raise InputError("all mean grids must share one time resolution")

    rng = child_rng(seed, "synth", "log")
    groups = rng.integers(n_groups, size=T)
    actions = rng.integers(K, size=T)
    u = rng.random(T)
    times = np.arange(T, dtype=np.float64) / (T - 1) if T > 1 else np.zeros((1,))
    features = np.arange(K, dtype=np.float64)

    out = SyntheticLog(events=[], means=grids, item_features=features)
    pscore = 1.0 / K
    for i in range(T):
        g, a = keys[int(groups[i])], int(actions[i])
        p = grids[g][a, out.column(float(times[i]))]
        out.events.append(LoggedEvent(
            timestamp=float(times[i]),
            action=a,
            reward=1.0 if u[i] < p else 0.0,
            pscore=pscore,
            user_features=(g,),
            item_feature=float(features[a]),
        ))
    log.info("synthetic log: K=%d T=%d groups=%d ctr=%.4f",
             K, T, n_groups, float(np.mean([e.reward for e in out.events])))
    return out


def true_value(log_: SyntheticLog, policy: str = "oracle") -> float:
    """
    Expected per-event reward of a target policy on the log's contexts:
    'oracle' plays the best action at each event, 'random' is uniform.
    """
    vals = []
    for e in log_.events:
        col = log_.means[e.user_features[0]][:, log_.column(e.timestamp)]
        if policy == "oracle":
            vals.append(float(col.max()))
        elif policy == "random":
            vals.append(float(col.mean()))
        else:
            raise InputError(f"no closed-form value for policy '{policy}'")
    return float(np.mean(vals)) if vals else 0.0
