from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.core.errors import InputError
from src.core.seeding import child_rng
from src.core.types import Observation
from src.harness.config import PolicySpec
from src.harness.csv_io import write_table
from src.harness.parallel import ordered_map
from src.harness.policies import make_policy

from .segment import ReplaySegment
from .synth import SyntheticLog

log = logging.getLogger(__name__)

UPDATE_RULES = ("all", "matched")


@dataclass(frozen=True)
class OpeResult:
    trials: pd.DataFrame   # policy, trial, V_hat
    summary: pd.DataFrame  # policy, mean, std, n_trials, n_events


def replay_segment(spec: PolicySpec, seg: ReplaySegment, seed: int, trial: int,
                   update_rule: str = "all", max_weight: Optional[float] = None,
                   truth: Optional[SyntheticLog] = None) -> float:
    """
    Sum of importance-weighted rewards of the target policy over one segment.

    At every event the policy's propensity for the logged arm (divided by the
    number of actions sharing that arm) is weighed against the logging
    propensity. The policy then absorbs the logged (arm, time, reward): always
    under update_rule 'all', only when it chose the logged arm under 'matched'.
    Policy state resets at every interval boundary.
    """
    mult = seg.multiplicity
    coords = seg.space.coordinates
    mu = truth.oracle_grid(seg) if truth is not None else None
    tau = truth.tau if truth is not None else None

    terms: List[float] = []
    for j, (start, stop) in enumerate(seg.intervals()):
        rng = child_rng(seed, "ope", spec.name, trial, seg.key, j)
        policy = make_policy(spec, seg.space, rng, mu=mu, tau=tau)
        for i in range(start, stop):
            e = seg.events[i]
            t = float(seg.times[i])
            arm = int(seg.arms[i])
            decision = policy.select(i - start, t)
            w = decision.propensity(arm) / mult[arm] / e.pscore
            if max_weight is not None:
                w = min(w, max_weight)
            terms.append(w * e.reward)
            if update_rule == "all" or decision.arm == arm:
                policy.observe(Observation(arm=arm, x=float(coords[arm]), t=t, y=e.reward))
    return math.fsum(terms)


def _replay_key(key: Tuple[int, int], spec: PolicySpec, segments: Sequence[ReplaySegment], seed: int,
                update_rule: str, max_weight: Optional[float], truth: Optional[SyntheticLog]) -> float:
    trial, s = key
    return replay_segment(spec, segments[s], seed, trial, update_rule, max_weight, truth)


def ips_evaluate(spec: PolicySpec, segments: Sequence[ReplaySegment], n_trials: int = 10, seed: int = 0,
                 update_rule: str = "all", max_weight: Optional[float] = None,
                 truth: Optional[SyntheticLog] = None, jobs: int = 1) -> OpeResult:
    """
    IPS value of one target policy: per trial, the grand average of the
    weighted rewards over every event of every segment. Returns per-trial
    values and their mean and std (ddof=1; 0 for a single trial).
    """
    if n_trials < 1:
        raise InputError("n_trials must be >= 1")
    if update_rule not in UPDATE_RULES:
        raise InputError(f"update_rule must be one of {UPDATE_RULES}")
    if max_weight is not None and not max_weight > 0:
        raise InputError("max_weight must be > 0 when set")
    if not segments:
        raise InputError("no segments to evaluate")

    n_events = sum(len(s) for s in segments)
    fn = functools.partial(_replay_key, spec=spec, segments=tuple(segments), seed=seed,
                           update_rule=update_rule, max_weight=max_weight, truth=truth)
    keys = [(trial, s) for trial in range(n_trials) for s in range(len(segments))]
    sums = ordered_map(fn, keys, jobs)

    per_trial = [[] for _ in range(n_trials)]
    for (trial, _s), v in sums:
        per_trial[trial].append(v)
    # fsum is exactly rounded, so the segment order cannot change the result
    values = np.array([math.fsum(v) / n_events for v in per_trial], dtype=np.float64)

    trials = pd.DataFrame({"policy": spec.name, "trial": np.arange(n_trials), "V_hat": values})
    std = float(values.std(ddof=1)) if n_trials > 1 else 0.0
    summary = pd.DataFrame([{
        "policy": spec.name,
        "mean": float(values.mean()),
        "std": std,
        "n_trials": n_trials,
        "n_events": n_events,
    }])
    log.info("%s: V_hat %.5f +/- %.5f over %d trials", spec.name, values.mean(), std, n_trials)
    return OpeResult(trials=trials, summary=summary)


def evaluate_policies(specs: Sequence[PolicySpec], segments: Sequence[ReplaySegment],
                      out_dir: Optional[Path] = None, **kwargs) -> OpeResult:
    results = [ips_evaluate(spec, segments, **kwargs) for spec in specs]
    out = OpeResult(
        trials=pd.concat([r.trials for r in results], ignore_index=True),
        summary=pd.concat([r.summary for r in results], ignore_index=True),
    )
    if out_dir is not None:
        write_table(out.trials, Path(out_dir) / "ope_trials.csv")
        write_table(out.summary, Path(out_dir) / "ope_summary.csv")
    return out


def ell_t_sweep(spec: PolicySpec, segments: Sequence[ReplaySegment], values: Sequence[float],
                out_dir: Optional[Path] = None, **kwargs) -> pd.DataFrame:
    """IPS value of a Quick-Draw spec as its time length-scale varies."""
    if spec.kind != "quickdraw":
        raise InputError("the ell_t sweep applies to quickdraw policies only")
    if not values:
        raise InputError("ell_t sweep needs at least one value")
    rows = []
    for v in values:
        s = ips_evaluate(spec.with_params(ell_t=float(v)), segments, **kwargs).summary.iloc[0]
        rows.append({"ell_t": float(v), "mean": float(s["mean"]), "std": float(s["std"])})
    table = pd.DataFrame(rows)
    if out_dir is not None:
        write_table(table, Path(out_dir) / "ope_ell_t.csv")
    return table
