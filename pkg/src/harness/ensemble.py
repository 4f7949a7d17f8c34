from __future__ import annotations

import dataclasses
import functools
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence

import numpy as np
import pandas as pd

from src.core.errors import EnsembleError, InputError
from src.envgen.field import sample_field

from .config import ExperimentConfig
from .csv_io import write_table
from .parallel import ordered_map
from .runner import RunResult, run_once

log = logging.getLogger(__name__)

FIELD_SWEEP_VARS = ("sigma_noise", "alpha", "rho_x", "rho_t")
POLICY_SWEEP_VARS = ("ell_x", "ell_t")
SWEEP_VARS = FIELD_SWEEP_VARS + POLICY_SWEEP_VARS


@dataclass(frozen=True)
class EnsembleResult:
    runs: pd.DataFrame     # policy, seed, mean_regret[, wall_time]
    summary: pd.DataFrame  # policy, mean_regret, std, stderr, n_seeds


def _run_seed(config: ExperimentConfig, seed: int) -> List[RunResult]:
    # every policy at this seed faces the same field and warm-up sequence
    field = sample_field(dataclasses.replace(config.field, seed=seed))
    results = [run_once(config, spec, seed, field=field) for spec in config.policies]
    log.debug("seed %d: %s", seed, ", ".join(f"{r.policy}={r.mean_regret:.4f}" for r in results))
    return results


def summarize(runs: pd.DataFrame) -> pd.DataFrame:
    rows = []
    for policy, g in runs.groupby("policy", sort=False):
        vals = g["mean_regret"].to_numpy(dtype=np.float64)
        n = vals.shape[0]
        std = float(vals.std(ddof=1)) if n > 1 else 0.0
        rows.append({
            "policy": policy,
            "mean_regret": float(vals.mean()),
            "std": std,
            "stderr": std / math.sqrt(n),
            "n_seeds": n,
        })
    return pd.DataFrame(rows)


def run_ensemble(config: ExperimentConfig, write: bool = True) -> EnsembleResult:
    """
    run_once for every policy over seeds seed_base .. seed_base + n_seeds - 1.
    Seeds may run in parallel; rows are ordered by seed, then policy order.
    """
    try:
        per_seed = ordered_map(functools.partial(_run_seed, config), config.seeds, config.jobs)
    except Exception as e:
        seed = getattr(e, "failed_key", -1)
        raise EnsembleError(f"ensemble aborted: seed {seed} failed: {e}", seed=seed) from e

    rows = []
    for seed, results in per_seed:
        for r in results:
            row = {"policy": r.policy, "seed": seed, "mean_regret": r.mean_regret}
            if config.wall_time:
                row["wall_time"] = float(r.wall_time.sum())
            rows.append(row)
    runs = pd.DataFrame(rows)
    result = EnsembleResult(runs=runs, summary=summarize(runs))

    if write and config.out_dir is not None:
        out = Path(config.out_dir)
        write_table(runs, out / "ensemble.csv")
        if config.traces:
            for seed, results in per_seed:
                for r in results:
                    write_table(r.trace_frame(), out / "traces" / f"{r.policy}_seed{seed}.csv")
    return result


def _apply_sweep_value(config: ExperimentConfig, variable: str, value: float) -> ExperimentConfig:
    if variable in FIELD_SWEEP_VARS:
        return dataclasses.replace(config, field=dataclasses.replace(config.field, **{variable: value}))
    specs = tuple(
        s.with_params(**{variable: value}) if s.kind == "quickdraw" else s
        for s in config.policies
    )
    return dataclasses.replace(config, policies=specs)


def run_sweep(config: ExperimentConfig, variable: str, values: Sequence[float]) -> pd.DataFrame:
    """One ensemble per value; columns (variable, value, policy, mean_regret, std)."""
    if variable not in SWEEP_VARS:
        raise InputError(f"unknown sweep variable '{variable}', expected one of {SWEEP_VARS}")
    values = list(values)
    if not values:
        raise InputError("sweep needs at least one value")

    frames = []
    for v in values:
        log.info("sweep %s=%g", variable, v)
        res = run_ensemble(_apply_sweep_value(config, variable, float(v)), write=False)
        s = res.summary[["policy", "mean_regret", "std"]].copy()
        s.insert(0, "value", float(v))
        s.insert(0, "variable", variable)
        frames.append(s)
    table = pd.concat(frames, ignore_index=True)

    if config.out_dir is not None:
        write_table(table, Path(config.out_dir) / "sweep.csv")
    return table
