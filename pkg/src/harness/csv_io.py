from __future__ import annotations

from pathlib import Path

import pandas as pd


def write_table(df: pd.DataFrame, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # 17 significant digits + round_trip parsing reproduce every float exactly
    df.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path


def read_table(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")
