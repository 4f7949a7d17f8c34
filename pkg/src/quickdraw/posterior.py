from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.core.errors import InputError
from src.core.metric import distances_to
from src.core.types import ArmSpace, Observation

GAMMA_MODES = ("fixed", "theoretical")


@dataclass(frozen=True)
class QuickDrawParams:
    ell_x: float = 1.0
    ell_t: float = 1.0          # math.inf -> stationary mode
    rho2: float = 1e-7
    gamma_mode: str = "fixed"
    gamma: float = 2.0          # fixed mode
    L: float = 1.0              # theoretical mode
    delta: float = 0.05         # theoretical mode
    truncation: Optional[float] = None  # c_trunc, nonstationary only
    ceiling: Optional[float] = 1.0      # None disables index clipping

    def __post_init__(self) -> None:
        if not self.ell_x > 0:
            raise InputError("ell_x must be > 0")
        if not self.ell_t > 0:
            raise InputError("ell_t must be > 0 (use inf for stationary mode)")
        if not self.rho2 > 0:
            raise InputError("rho2 must be > 0")
        if self.gamma_mode not in GAMMA_MODES:
            raise InputError(f"gamma_mode must be one of {GAMMA_MODES}")
        if self.gamma_mode == "fixed" and not self.gamma > 0:
            raise InputError("fixed gamma must be > 0")
        if self.gamma_mode == "theoretical":
            if not self.L > 0:
                raise InputError("theoretical gamma requires L > 0")
            if not 0.0 < self.delta < 1.0:
                raise InputError("theoretical gamma requires 0 < delta < 1")
        if self.truncation is not None and not self.truncation > 0:
            raise InputError("truncation must be > 0 when set")

    @property
    def stationary(self) -> bool:
        return math.isinf(self.ell_t)


@dataclass(frozen=True)
class PosteriorSummary:
    mu_hat: np.ndarray     # [K]
    sigma_hat: np.ndarray  # [K], +inf when nothing has been observed
    t_query: float

    @property
    def empty(self) -> bool:
        return bool(np.all(np.isinf(self.sigma_hat)))


def sigma_hat_sq(params: QuickDrawParams, distance, lag=0.0):
    """
    Per-observation variance at a query point:
      rho2 + (D / ell_x)^2 + (lag / ell_t)^2
    The time term is skipped entirely in stationary mode.
    Broadcasts over numpy arrays.
    """
    s2 = params.rho2 + np.square(np.asarray(distance, dtype=np.float64) / params.ell_x)
    if not params.stationary:
        s2 = s2 + np.square(np.asarray(lag, dtype=np.float64) / params.ell_t)
    return s2


class _Column:
    """Append-only float64 buffer with amortised doubling."""

    def __init__(self, capacity: int = 256):
        self._data = np.empty((capacity,), dtype=np.float64)
        self._n = 0

    def append(self, v: float) -> None:
        if self._n == self._data.shape[0]:
            grown = np.empty((2 * self._data.shape[0],), dtype=np.float64)
            grown[: self._n] = self._data
            self._data = grown
        self._data[self._n] = v
        self._n += 1

    def view(self) -> np.ndarray:
        return self._data[: self._n]

    def __len__(self) -> int:
        return self._n


class QuickDrawState:
    """
    History plus, in stationary mode, the running precision sums
      S_nu[k]  = sum_s nu_s(x_k)
      S_nuy[k] = sum_s nu_s(x_k) * y_s
    kept in extended precision. Time-dependent precisions change every round,
    so the cache is not used in nonstationary mode.
    """

    def __init__(self, params: QuickDrawParams, space: ArmSpace):
        self.params = params
        self.space = space
        self._x = _Column()
        self._t = _Column()
        self._y = _Column()
        self._arms: list[int] = []
        self.s_nu = np.zeros((space.K,), dtype=np.longdouble)
        self.s_nuy = np.zeros((space.K,), dtype=np.longdouble)
        self.y_min = math.inf
        self.y_max = -math.inf

    def __len__(self) -> int:
        return len(self._y)

    @property
    def xs(self) -> np.ndarray:
        return self._x.view()

    @property
    def ts(self) -> np.ndarray:
        return self._t.view()

    @property
    def ys(self) -> np.ndarray:
        return self._y.view()

    @property
    def arms(self) -> list[int]:
        return self._arms

    def add(self, obs: Observation) -> None:
        self._x.append(obs.x)
        self._t.append(obs.t)
        self._y.append(obs.y)
        self._arms.append(int(obs.arm))
        self.y_min = min(self.y_min, float(obs.y))
        self.y_max = max(self.y_max, float(obs.y))
        if self.params.stationary:
            d = np.abs(self.space.coordinates - obs.x) / self.space.diameter
            nu = 1.0 / sigma_hat_sq(self.params, d)
            self.s_nu += nu.astype(np.longdouble)
            self.s_nuy += nu.astype(np.longdouble) * np.longdouble(obs.y)


def _empty_summary(K: int, t_query: float) -> PosteriorSummary:
    return PosteriorSummary(
        mu_hat=np.full((K,), 0.5),
        sigma_hat=np.full((K,), np.inf),
        t_query=float(t_query),
    )


def _finish(s_nu: np.ndarray, s_nuy: np.ndarray, y_lo: float, y_hi: float, t_query: float) -> PosteriorSummary:
    mu = np.asarray(s_nuy / s_nu, dtype=np.float64)
    # the ratio can land one ulp outside the convex hull of the rewards
    mu = np.clip(mu, y_lo, y_hi)
    sigma = np.asarray(np.sqrt(1.0 / s_nu), dtype=np.float64)
    return PosteriorSummary(mu_hat=mu, sigma_hat=sigma, t_query=float(t_query))


def posterior(state: QuickDrawState, t_query: float) -> PosteriorSummary:
    """
    Per-arm product-of-Gaussians posterior at time t_query:
      Sigma^2(x) = [sum_s 1/sigma_s^2(x, t)]^-1
      mu(x)      = Sigma^2(x) * sum_s y_s / sigma_s^2(x, t)
    Empty history gives the sentinel (mu=0.5, Sigma=inf).
    """
    p = state.params
    K = state.space.K
    if len(state) == 0:
        return _empty_summary(K, t_query)

    if p.stationary:
        return _finish(state.s_nu, state.s_nuy, state.y_min, state.y_max, t_query)

    xs, ts, ys = state.xs, state.ts, state.ys
    lag = t_query - ts
    if p.truncation is not None:
        keep = (lag / p.ell_t) <= p.truncation
        if not np.any(keep):
            return _empty_summary(K, t_query)
        xs, lag, ys = xs[keep], lag[keep], ys[keep]

    d = distances_to(state.space, xs)                 # [K, n]
    nu = 1.0 / sigma_hat_sq(p, d, lag[None, :])       # [K, n]
    s_nu = nu.sum(axis=1, dtype=np.longdouble)
    s_nuy = (nu * ys[None, :]).sum(axis=1, dtype=np.longdouble)
    return _finish(s_nu, s_nuy, float(ys.min()), float(ys.max()), t_query)


def ucb_index(summary: PosteriorSummary, gamma: float, ceiling: Optional[float] = 1.0) -> np.ndarray:
    idx = summary.mu_hat + gamma * summary.sigma_hat
    if ceiling is not None:
        idx = np.minimum(idx, ceiling)
    return idx


def gamma_schedule(L: float, delta: float, T: int, params: QuickDrawParams) -> float:
    """
    Exploration multiplier that makes the concentration event hold w.p. 1 - delta:
      gamma_T = 2L + 4 C1 ln^2(2 T^2 / delta),  C1 = sqrt(rho2 + 1/ell_x^2) / rho2
    """
    if not 0.0 < delta < 1.0:
        raise InputError(f"delta must lie in (0, 1), got {delta}")
    if T < 1:
        raise InputError("T must be >= 1")
    if L < 0:
        raise InputError("L must be >= 0")
    c1 = math.sqrt(params.rho2 + 1.0 / params.ell_x ** 2) / params.rho2
    log_term = math.log(2.0 * T * T / delta)
    return 2.0 * L + 4.0 * c1 * log_term * log_term
