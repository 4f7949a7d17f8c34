from __future__ import annotations

import argparse
import math
from pathlib import Path

import numpy as np

# Make sure imports work when running as "python scripts/posterior_crosscheck.py" from repo root
import sys
sys.path.append(str(Path(__file__).resolve().parents[1]))

from src.core.seeding import child_rng
from src.core.types import ArmSpace, Observation
from src.quickdraw.posterior import QuickDrawParams, QuickDrawState, posterior


def brute_force_posterior(params: QuickDrawParams, space: ArmSpace, history, t_query: float):
    """Plain double loop over arms and observations, in Python floats."""
    mu = np.zeros((space.K,))
    sigma = np.zeros((space.K,))
    for k in range(space.K):
        s_nu = 0.0
        s_nuy = 0.0
        for obs in history:
            d = abs(space.coordinates[k] - obs.x) / space.diameter
            s2 = params.rho2 + (d / params.ell_x) ** 2
            if not math.isinf(params.ell_t):
                s2 += ((t_query - obs.t) / params.ell_t) ** 2
            s_nu += 1.0 / s2
            s_nuy += obs.y / s2
        mu[k] = s_nuy / s_nu
        sigma[k] = math.sqrt(1.0 / s_nu)
    return mu, sigma


def compare(params: QuickDrawParams, space: ArmSpace, n: int, seed: int):
    rng = child_rng(seed, "crosscheck")
    state = QuickDrawState(params, space)
    history = []
    for s in range(n):
        arm = int(rng.integers(space.K))
        obs = Observation(arm=arm, x=float(space.coordinates[arm]), t=s * 1e-3, y=float(rng.random()))
        state.add(obs)
        history.append(obs)
    t_query = n * 1e-3
    fast = posterior(state, t_query)
    mu, sigma = brute_force_posterior(params, space, history, t_query)
    return (float(np.max(np.abs(fast.mu_hat - mu) / np.maximum(np.abs(mu), 1e-300))),
            float(np.max(np.abs(fast.sigma_hat - sigma) / sigma)))


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--K", type=int, default=50)
    ap.add_argument("--n", type=int, default=500, help="observations in the history")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tol", type=float, default=1e-9, help="relative tolerance")
    args = ap.parse_args()

    space = ArmSpace.grid(args.K)
    cases = {
        "stationary (cached sums)": QuickDrawParams(ell_t=math.inf),
        "nonstationary (recomputed)": QuickDrawParams(ell_t=1.0),
        "nonstationary, short ell_t": QuickDrawParams(ell_x=0.1, ell_t=0.01),
    }

    print(f"[CROSSCHECK] K={args.K} n={args.n} seed={args.seed}")
    worst = 0.0
    for name, params in cases.items():
        err_mu, err_sigma = compare(params, space, args.n, args.seed)
        worst = max(worst, err_mu, err_sigma)
        print(f"  {name:28s} rel.err mu={err_mu:.2e} sigma={err_sigma:.2e}")

    if worst <= args.tol:
        print(f"\n[OK] vectorised posterior matches the double loop (worst {worst:.2e})")
    else:
        print(f"\n[WARN] worst relative error {worst:.2e} exceeds {args.tol:.0e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
