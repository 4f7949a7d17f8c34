from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.core.errors import InputError
from src.core.linalg import jittered_cholesky
from src.core.seeding import child_rng
from src.core.types import ArmSpace, argmax_lowest

# initial attempt plus three retries
FIELD_JITTERS = (0.0, 1e-10, 1e-9, 1e-8)


@dataclass(frozen=True)
class FieldParams:
    rho_x: float = 0.1
    rho_t: float = 0.1          # math.inf -> time-constant field
    alpha: float = 1.0
    sigma_noise: float = 0.0
    K: int = 1000
    T: int = 1000
    tau_s: float = 1e-3
    seed: int = 0

    def __post_init__(self) -> None:
        if not (self.rho_x > 0 and self.rho_t > 0):
            raise InputError("correlation lengths must be > 0")
        if not self.alpha >= 1.0:
            raise InputError("alpha must be >= 1")
        if not self.sigma_noise >= 0.0:
            raise InputError("sigma_noise must be >= 0")
        if self.K < 1 or self.T < 1:
            raise InputError("K and T must be >= 1")
        if not self.tau_s > 0:
            raise InputError("tau_s must be > 0")

    @property
    def stationary(self) -> bool:
        return math.isinf(self.rho_t)

    def space(self) -> ArmSpace:
        return ArmSpace.grid(self.K)

    def times(self) -> np.ndarray:
        return np.arange(self.T, dtype=np.float64) * self.tau_s


@dataclass(frozen=True)
class PayoutField:
    mu: np.ndarray  # [K, T] mean payout in [0, 1]
    params: FieldParams

    @property
    def space(self) -> ArmSpace:
        return self.params.space()

    @property
    def K(self) -> int:
        return int(self.mu.shape[0])

    @property
    def T(self) -> int:
        return int(self.mu.shape[1])


def se_covariance(points: np.ndarray, length: float) -> np.ndarray:
    d = points[:, None] - points[None, :]
    return np.exp(-0.5 * np.square(d / length))


def sample_gaussian_field(params: FieldParams, rng: np.random.Generator) -> np.ndarray:
    """
    Zero-mean field on the K x T grid with separable covariance
      C = exp(-dx^2 / 2 rho_x^2) * exp(-dt^2 / 2 rho_t^2)
    drawn as Lx Z Lt^T, so that cov(vec F) = Ct kron Cx.
    """
    x = params.space().coordinates
    Lx, _ = jittered_cholesky(se_covariance(x, params.rho_x), FIELD_JITTERS)
    if params.stationary:
        z = rng.standard_normal((params.K, 1))
        return np.repeat(Lx @ z, params.T, axis=1)
    Lt, _ = jittered_cholesky(se_covariance(params.times(), params.rho_t), FIELD_JITTERS)
    z = rng.standard_normal((params.K, params.T))
    return Lx @ z @ Lt.T


def rescale_and_sharpen(raw: np.ndarray, alpha: float) -> np.ndarray:
    """Whole-grid min-max rescale to [0, 1], then element-wise power alpha."""
    lo, hi = float(raw.min()), float(raw.max())
    if hi == lo:
        return np.zeros_like(raw)
    unit = (raw - lo) / (hi - lo)
    unit = np.clip(unit, 0.0, 1.0)
    return unit if alpha == 1.0 else np.power(unit, alpha)


def sample_field(params: FieldParams) -> PayoutField:
    raw = sample_gaussian_field(params, child_rng(params.seed, "field"))
    mu = rescale_and_sharpen(raw, params.alpha)
    mu.setflags(write=False)
    return PayoutField(mu=mu, params=params)


def observe(field: PayoutField, arm: int, round_idx: int, rng: np.random.Generator) -> float:
    """
    mu[arm, round] + N(0, sigma_noise^2).
    Exactly one normal is drawn per call so stream positions stay aligned
    with rounds whatever the noise level.
    """
    eps = float(rng.standard_normal())
    return float(field.mu[arm, round_idx]) + field.params.sigma_noise * eps


def oracle_best(field: PayoutField, round_idx: int) -> Tuple[int, float]:
    col = field.mu[:, round_idx]
    arm = argmax_lowest(col)
    return arm, float(col[arm])


def empirical_lipschitz(field: PayoutField) -> float:
    """Largest adjacent-arm finite difference of mu per unit normalized distance."""
    if field.K < 2:
        return 0.0
    space = field.space
    dx = np.diff(space.coordinates) / space.diameter
    slopes = np.abs(np.diff(field.mu, axis=0)) / dx[:, None]
    return float(slopes.max())
