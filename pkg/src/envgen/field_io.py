from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np
import pandas as pd

from src.core.errors import InputError

from .field import FieldParams, PayoutField


def _sidecar(path: Path) -> Path:
    return path.with_suffix(path.suffix + ".json")


def export_field(field: PayoutField, path: Path) -> None:
    """
    .csv -> one row per arm, one column per round
    .npy -> raw float64 grid
    A <path>.json sidecar carries the FieldParams.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix == ".csv":
        df = pd.DataFrame(field.mu, columns=[f"r{j}" for j in range(field.T)])
        df.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    elif path.suffix == ".npy":
        np.save(path, np.asarray(field.mu, dtype=np.float64))
    else:
        raise InputError(f"unsupported field format: {path.suffix}")
    _sidecar(path).write_text(json.dumps(asdict(field.params), indent=2), encoding="utf-8")


def import_field(path: Path) -> PayoutField:
    path = Path(path)
    params = FieldParams(**json.loads(_sidecar(path).read_text(encoding="utf-8")))
    if path.suffix == ".csv":
        mu = pd.read_csv(path, float_precision="round_trip").to_numpy(dtype=np.float64)
    elif path.suffix == ".npy":
        mu = np.load(path)
    else:
        raise InputError(f"unsupported field format: {path.suffix}")
    if mu.shape != (params.K, params.T):
        raise InputError(f"grid shape {mu.shape} does not match params ({params.K}, {params.T})")
    mu.setflags(write=False)
    return PayoutField(mu=mu, params=params)
