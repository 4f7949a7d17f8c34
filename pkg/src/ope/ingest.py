from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

from src.core.errors import ConfigError, IngestError
from src.harness.csv_io import write_table

from .events import LoggedEvent, SchemaMapping

log = logging.getLogger(__name__)

MAX_BAD_FRACTION = 0.01


def _parse_float(s) -> float:
    try:
        return float(s)
    except (TypeError, ValueError):
        return float("nan")


def _numeric(df: pd.DataFrame, col: str) -> np.ndarray:
    # float() rounds correctly, so values written with 17 digits come back exact
    return np.array([_parse_float(s) for s in df[col]], dtype=np.float64)


def ingest_log(path: Path, schema: SchemaMapping) -> List[LoggedEvent]:
    """
    Parse a logged-feedback CSV into events, in file order.

    Rows with a missing field, an unparseable number, a non-integer or negative
    action, or pscore outside (0, 1] are rejected with their line number
    (header = line 1). More than 1% rejected rows is a hard failure.
    """
    path = Path(path)
    df = pd.read_csv(path, dtype=str, keep_default_na=True)
    missing = [c for c in schema.required_columns if c not in df.columns]
    if missing:
        raise ConfigError(f"log {path.name} has no column '{missing[0]}' named by the schema mapping")

    ts = _numeric(df, schema.timestamp)
    act = _numeric(df, schema.action)
    rew = _numeric(df, schema.reward)
    ps = _numeric(df, schema.pscore)
    item = _numeric(df, schema.item_feature)
    users = df[list(schema.user_features)] if schema.user_features else None

    bad: List[Tuple[int, str]] = []
    events: List[LoggedEvent] = []
    for i in range(len(df)):
        line = i + 2
        reason = None
        if users is not None and users.iloc[i].isna().any():
            reason = "missing user feature"
        elif not np.all(np.isfinite([ts[i], act[i], rew[i], ps[i], item[i]])):
            reason = "missing or unparseable field"
        elif act[i] < 0 or act[i] != np.floor(act[i]):
            reason = f"bad action {df[schema.action].iloc[i]!r}"
        elif not 0.0 < ps[i] <= 1.0:
            reason = f"pscore {ps[i]} outside (0, 1]"
        if reason is not None:
            bad.append((line, reason))
            continue
        ufeat = tuple(str(v) for v in users.iloc[i]) if users is not None else ()
        events.append(LoggedEvent(
            timestamp=float(ts[i]),
            action=int(act[i]),
            reward=float(rew[i]),
            pscore=float(ps[i]),
            user_features=ufeat,
            item_feature=float(item[i]),
        ))

    if bad:
        for line, reason in bad[:10]:
            log.warning("%s line %d rejected: %s", path.name, line, reason)
        if len(bad) > 10:
            log.warning("%s: %d more rejected rows", path.name, len(bad) - 10)
        if len(bad) > MAX_BAD_FRACTION * len(df):
            raise IngestError(f"{path.name}: {len(bad)} of {len(df)} rows rejected (limit 1%)", bad)
    log.info("ingested %d events from %s", len(events), path.name)
    return events


def events_frame(events: Sequence[LoggedEvent], schema: SchemaMapping) -> pd.DataFrame:
    cols = {
        schema.timestamp: [e.timestamp for e in events],
        schema.action: [e.action for e in events],
        schema.reward: [e.reward for e in events],
        schema.pscore: [e.pscore for e in events],
        schema.item_feature: [e.item_feature for e in events],
    }
    for j, name in enumerate(schema.user_features):
        cols[name] = [e.user_features[j] for e in events]
    return pd.DataFrame(cols)


def write_log(events: Sequence[LoggedEvent], path: Path, schema: SchemaMapping) -> Path:
    return write_table(events_frame(events, schema), path)
