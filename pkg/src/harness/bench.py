from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from src.core.errors import InputError
from src.envgen.field import FieldParams, empirical_lipschitz, sample_field

from .config import ExperimentConfig, PolicySpec
from .csv_io import write_table
from .runner import run_once

log = logging.getLogger(__name__)

BENCH_QUICKDRAW = PolicySpec("quickdraw", "quickdraw", {"ell_t": math.inf})
BENCH_GP = PolicySpec("gp_full", "sw_gp_ucb", {"window": None, "hyperopt": "none"})
THEORETICAL_QUICKDRAW = PolicySpec(
    "quickdraw", "quickdraw", {"ell_t": math.inf, "gamma_mode": "theoretical", "delta": 0.1}
)


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    x = np.log(np.asarray(xs, dtype=np.float64))
    y = np.log(np.asarray(ys, dtype=np.float64))
    return float(np.polyfit(x, y, 1)[0])


def bench_runtime(t_values: Sequence[int], K: int = 100, seed: int = 0, rho_x: float = 0.1,
                  policies: Sequence[PolicySpec] = (BENCH_QUICKDRAW, BENCH_GP),
                  out_dir: Optional[Path] = None) -> pd.DataFrame:
    """
    Cumulative time spent selecting arms, per policy, after T rounds on a
    stationary field. The first policy is the reference for the ratio column.
    """
    t_values = sorted({int(t) for t in t_values})
    if not t_values or t_values[0] < 1:
        raise InputError("bench needs positive T values")
    t_max = t_values[-1]
    fp = FieldParams(rho_x=rho_x, rho_t=math.inf, K=K, T=t_max, seed=seed)
    config = ExperimentConfig(field=fp, policies=tuple(policies), warmup_rounds=0, n_seeds=1, seed_base=seed)
    field = sample_field(fp)

    cum = {}
    for spec in policies:
        res = run_once(config, spec, seed, field=field)
        c = np.cumsum(res.wall_time)
        cum[spec.name] = {T: float(c[T - 1]) for T in t_values}
        log.info("bench %s: T=%d total %.3fs", spec.name, t_max, cum[spec.name][t_max])

    ref = policies[0].name
    rows = []
    for spec in policies:
        for T in t_values:
            secs = cum[spec.name][T]
            rows.append({
                "policy": spec.name,
                "T": T,
                "cumulative_seconds": secs,
                "ratio": secs / max(cum[ref][T], 1e-12),
            })
    table = pd.DataFrame(rows)
    if out_dir is not None:
        write_table(table, Path(out_dir) / "bench.csv")
    return table


@dataclass(frozen=True)
class ScalingResult:
    slope: Optional[float]
    table: pd.DataFrame    # T, mean_cumulative_regret
    skipped: bool = False
    reason: str = ""


def _with_empirical_L(spec: PolicySpec, field) -> PolicySpec:
    p = spec.params
    if spec.kind == "quickdraw" and p.get("gamma_mode") == "theoretical" and "L" not in p:
        return spec.with_params(L=max(empirical_lipschitz(field), 1e-12))
    return spec


def regret_scaling_test(config: ExperimentConfig, t_values: Sequence[int] = (250, 500, 1000, 2000),
                        n_seeds: int = 20, spec: PolicySpec = THEORETICAL_QUICKDRAW) -> ScalingResult:
    """
    Fit log R_T against log T for one policy on stationary fields.
    Cumulative regret counts from the end of warm-up. A theoretical-gamma
    Quick-Draw spec without L gets the empirical Lipschitz constant of each field.
    """
    if not config.field.stationary:
        raise InputError("regret scaling needs a stationary field (rho_t = inf)")
    t_values = sorted(int(t) for t in t_values)
    t_max = t_values[-1]
    if config.warmup_rounds >= t_values[0]:
        raise InputError("warm-up must end before the smallest T")
    cfg = dataclasses.replace(config, field=dataclasses.replace(config.field, T=t_max))

    totals = np.zeros((len(t_values),), dtype=np.float64)
    for seed in range(cfg.seed_base, cfg.seed_base + n_seeds):
        field = sample_field(dataclasses.replace(cfg.field, seed=seed))
        res = run_once(cfg, _with_empirical_L(spec, field), seed, field=field)
        totals += [res.cumulative_at(T) for T in t_values]
    means = totals / n_seeds
    table = pd.DataFrame({"T": t_values, "mean_cumulative_regret": means})

    if np.any(means <= 0):
        reason = f"{spec.name}: non-positive cumulative regret, slope undefined"
        log.warning("regret scaling skipped: %s", reason)
        return ScalingResult(slope=None, table=table, skipped=True, reason=reason)
    return ScalingResult(slope=loglog_slope(t_values, means), table=table)
