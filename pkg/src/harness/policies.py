from __future__ import annotations

import dataclasses
from typing import Any, Dict, Optional, Type

import numpy as np

from src.baselines.gp import GpGrid, GpParams, SquaredExponential
from src.baselines.oracle import OraclePolicy
from src.baselines.random_policy import RandomPolicy
from src.baselines.restless import RestlessParams, RestlessPolicy
from src.baselines.sliding_greedy import SlidingGreedyParams, SlidingGreedyPolicy
from src.baselines.sliding_ucb import SlidingUcbParams, SlidingUcbPolicy
from src.baselines.sw_gp_ucb import SwGpUcbPolicy
from src.core.errors import ConfigError
from src.core.policy import BasePolicy
from src.core.types import ArmSpace
from src.quickdraw.policy import QuickDrawParams, QuickDrawPolicy

from .config import PolicySpec


def _build(cls: Type, params: Dict[str, Any], where: str):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(params) - known)
    if unknown:
        raise ConfigError(f"unknown key: {unknown[0]} (at {where}.{unknown[0]})")
    return cls(**params)


def gp_params_from(params: Dict[str, Any], where: str = "sw_gp_ucb") -> GpParams:
    """Flat config block -> GpParams (kernel and grid are nested dataclasses)."""
    p = dict(params)
    kernel = SquaredExponential(
        amplitude=float(p.pop("amplitude", 1.0)),
        lengthscale=float(p.pop("lengthscale", 0.1)),
    )
    hyperopt = p.pop("hyperopt", "grid")
    grid_cfg = p.pop("grid", None) or {}
    if hyperopt not in ("grid", "none", None):
        raise ConfigError(f"bad value for {where}.hyperopt: {hyperopt!r} (grid|none)")
    grid = None
    if hyperopt == "grid":
        grid = _build(GpGrid, {k: tuple(float(x) for x in v) for k, v in grid_cfg.items()}, f"{where}.grid")
    window = p.pop("window", 100)
    return _build(GpParams, {**p, "window": window, "kernel": kernel, "hyperopt": grid}, where)


_PARAM_CLASSES = {
    "quickdraw": QuickDrawParams,
    "greedy": SlidingGreedyParams,
    "restless": RestlessParams,
    "sliding_ucb": SlidingUcbParams,
}


def policy_params(spec: PolicySpec):
    """Validated parameter object for a spec; None for kinds without parameters."""
    where = spec.name
    if spec.kind == "sw_gp_ucb":
        return gp_params_from(spec.params, where)
    if spec.kind in _PARAM_CLASSES:
        return _build(_PARAM_CLASSES[spec.kind], spec.params, where)
    if spec.params:
        key = sorted(spec.params)[0]
        raise ConfigError(f"unknown key: {key} (at {where}.{key})")
    return None


def make_policy(spec: PolicySpec, space: ArmSpace, rng: np.random.Generator,
                mu: Optional[np.ndarray] = None, tau: Optional[float] = None) -> BasePolicy:
    """
    Instantiate a policy from its spec.
    The oracle needs the mean grid `mu` [K, T] and the round spacing `tau`.
    """
    params = policy_params(spec)
    if spec.kind == "quickdraw":
        return QuickDrawPolicy(space, params, rng)
    if spec.kind == "greedy":
        return SlidingGreedyPolicy(space, params, rng)
    if spec.kind == "restless":
        return RestlessPolicy(space, params, rng)
    if spec.kind == "sw_gp_ucb":
        return SwGpUcbPolicy(space, params, rng)
    if spec.kind == "sliding_ucb":
        return SlidingUcbPolicy(space, params, rng)
    if spec.kind == "random":
        return RandomPolicy(space, rng)
    if spec.kind == "oracle":
        if mu is None or tau is None:
            raise ConfigError(f"policy '{spec.name}' (oracle) needs a known mean grid")
        return OraclePolicy(space, mu, tau, rng)
    raise ConfigError(f"unknown policy kind: {spec.kind}")
