from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Tuple

import numpy as np
from scipy import linalg

from src.core.errors import InputError
from src.core.linalg import escalating, jittered_cholesky

GP_JITTERS = escalating(1e-10, 1e-2)


@dataclass(frozen=True)
class SquaredExponential:
    amplitude: float = 1.0     # sigma_f^2
    lengthscale: float = 0.1   # in normalized-distance units

    def __post_init__(self) -> None:
        if not (self.amplitude > 0 and self.lengthscale > 0):
            raise InputError("kernel amplitude and lengthscale must be > 0")

    def __call__(self, d: np.ndarray) -> np.ndarray:
        return self.amplitude * np.exp(-0.5 * np.square(d / self.lengthscale))


@dataclass(frozen=True)
class GpGrid:
    lengthscales: Tuple[float, ...] = (0.03, 0.1, 0.3, 1.0)
    amplitudes: Tuple[float, ...] = (0.25, 1.0)
    noises: Tuple[float, ...] = (1e-4, 1e-2)

    def __post_init__(self) -> None:
        if not (self.lengthscales and self.amplitudes and self.noises):
            raise InputError("hyperparameter grid axes must be non-empty")

    def candidates(self) -> Iterator[Tuple[SquaredExponential, float]]:
        for ls, amp, noise in itertools.product(self.lengthscales, self.amplitudes, self.noises):
            yield SquaredExponential(amplitude=amp, lengthscale=ls), noise


@dataclass(frozen=True)
class GpParams:
    window: Optional[int] = 100          # None -> full history
    kernel: SquaredExponential = field(default_factory=SquaredExponential)
    noise: float = 1e-2                  # rho^2 of the GP
    ucb_beta: float = 4.0
    hyperopt: Optional[GpGrid] = field(default_factory=GpGrid)

    def __post_init__(self) -> None:
        if self.window is not None and self.window < 1:
            raise InputError("window must be >= 1")
        if not (self.noise > 0 and self.ucb_beta > 0):
            raise InputError("noise and ucb_beta must be > 0")


@dataclass(frozen=True)
class _GpFit:
    L: np.ndarray       # [m, m] lower factor of K + noise*I (+ jitter)
    alpha: np.ndarray   # [m] (K + noise*I)^-1 (y - offset)
    offset: float       # window mean, 0 for an empty window
    jitter: float


def _fit(kernel: SquaredExponential, noise: float, u: np.ndarray, y: np.ndarray) -> _GpFit:
    offset = float(y.mean())
    yc = y - offset
    gram = kernel(np.abs(u[:, None] - u[None, :]))
    gram[np.diag_indices_from(gram)] += noise
    L, jit = jittered_cholesky(gram, GP_JITTERS)
    alpha = linalg.cho_solve((L, True), yc, check_finite=False)
    return _GpFit(L=L, alpha=alpha, offset=offset, jitter=jit)


def gp_log_marginal_likelihood(kernel: SquaredExponential, noise: float,
                               u: np.ndarray, y: np.ndarray) -> float:
    u = np.asarray(u, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    m = u.shape[0]
    if m == 0:
        return 0.0
    f = _fit(kernel, noise, u, y)
    yc = y - f.offset
    return float(-0.5 * yc @ f.alpha - np.log(np.diag(f.L)).sum() - 0.5 * m * math.log(2.0 * math.pi))


def gp_posterior(kernel: SquaredExponential, noise: float, u_obs: np.ndarray, y_obs: np.ndarray,
                 u_query: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Exact GP regression on normalized coordinates.
      mean = offset + k^T (K + noise I)^-1 (y - offset)
      var  = k(x, x) - k^T (K + noise I)^-1 k
    returns: (mean [Q], var [Q])
    """
    u_obs = np.asarray(u_obs, dtype=np.float64)
    y_obs = np.asarray(y_obs, dtype=np.float64)
    u_query = np.asarray(u_query, dtype=np.float64)
    if u_obs.shape[0] == 0:
        return np.zeros_like(u_query), np.full(u_query.shape, kernel.amplitude)

    f = _fit(kernel, noise, u_obs, y_obs)
    kq = kernel(np.abs(u_query[:, None] - u_obs[None, :]))     # [Q, m]
    mean = f.offset + kq @ f.alpha
    v = linalg.solve_triangular(f.L, kq.T, lower=True, check_finite=False)  # [m, Q]
    var = kernel.amplitude - np.einsum("ij,ij->j", v, v)
    return mean, np.maximum(var, 0.0)


def fit_hyperparameters(grid: GpGrid, u: np.ndarray, y: np.ndarray) -> Tuple[SquaredExponential, float]:
    """Grid point with the highest log marginal likelihood; first one wins ties."""
    best = None
    best_lml = -math.inf
    for kernel, noise in grid.candidates():
        lml = gp_log_marginal_likelihood(kernel, noise, u, y)
        if best is None or lml > best_lml:
            best, best_lml = (kernel, noise), lml
    return best
