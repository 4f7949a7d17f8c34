from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Tuple

import yaml

from src.core.errors import ConfigError, InputError


@dataclass(frozen=True)
class LoggedEvent:
    timestamp: float
    action: int
    reward: float
    pscore: float                    # logging propensity pi_l(a | context)
    user_features: Tuple[str, ...]
    item_feature: float              # raw, before rescaling

    def __post_init__(self) -> None:
        if not 0.0 < self.pscore <= 1.0:
            raise InputError(f"pscore must lie in (0, 1], got {self.pscore}")
        if self.action < 0:
            raise InputError(f"action must be >= 0, got {self.action}")

    @property
    def group(self) -> str:
        return "|".join(self.user_features)


SCHEMA_KEYS = ("timestamp", "action", "reward", "pscore", "item_feature", "user_features")


@dataclass(frozen=True)
class SchemaMapping:
    """Which CSV column holds which event field."""

    timestamp: str = "timestamp"
    action: str = "action"
    reward: str = "reward"
    pscore: str = "pscore"
    item_feature: str = "item_feature"
    user_features: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def required_columns(self) -> Tuple[str, ...]:
        return (self.timestamp, self.action, self.reward, self.pscore, self.item_feature) + self.user_features

    def as_dict(self) -> Dict[str, Any]:
        return {k: (list(v) if k == "user_features" else v) for k, v in
                ((k, getattr(self, k)) for k in SCHEMA_KEYS)}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any], where: str = "ope.schema") -> "SchemaMapping":
        unknown = sorted(set(d) - set(SCHEMA_KEYS))
        if unknown:
            raise ConfigError(f"unknown key: {unknown[0]} (at {where}.{unknown[0]})")
        kw: Dict[str, Any] = {}
        for k in SCHEMA_KEYS:
            if k not in d or d[k] is None:
                continue
            if k == "user_features":
                if isinstance(d[k], str):
                    raise ConfigError(f"{where}.user_features must be a list of column names")
                kw[k] = tuple(str(c) for c in d[k])
            else:
                kw[k] = str(d[k])
        return cls(**kw)


def load_schema(path: Path) -> SchemaMapping:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"schema file not found: {path}")
    cfg = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    if not isinstance(cfg, dict):
        raise ConfigError(f"schema file {path} must hold a mapping")
    return SchemaMapping.from_dict(cfg)


def save_schema(schema: SchemaMapping, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.safe_dump(schema.as_dict(), sort_keys=False), encoding="utf-8")
    return path
