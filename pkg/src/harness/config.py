from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from src.core.errors import InputError
from src.envgen.field import FieldParams

POLICY_KINDS = ("quickdraw", "greedy", "restless", "sw_gp_ucb", "sliding_ucb", "random", "oracle")


@dataclass(frozen=True)
class PolicySpec:
    name: str
    kind: str
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise InputError(f"unknown policy kind '{self.kind}', expected one of {POLICY_KINDS}")

    def with_params(self, **updates: Any) -> "PolicySpec":
        return PolicySpec(name=self.name, kind=self.kind, params={**self.params, **updates})


@dataclass(frozen=True)
class ExperimentConfig:
    field: FieldParams
    policies: Tuple[PolicySpec, ...]
    warmup_rounds: int = 100
    n_seeds: int = 20
    seed_base: int = 0
    out_dir: Optional[Path] = None
    traces: bool = False
    wall_time: bool = False
    jobs: int = 1

    def __post_init__(self) -> None:
        if not 0 <= self.warmup_rounds < self.field.T:
            raise InputError(f"warmup_rounds={self.warmup_rounds} must lie in [0, T={self.field.T})")
        if self.n_seeds < 1:
            raise InputError("n_seeds must be >= 1")
        if not self.policies:
            raise InputError("at least one policy is required")
        names = [p.name for p in self.policies]
        if len(set(names)) != len(names):
            raise InputError(f"policy names must be unique: {names}")
        if self.jobs < 1:
            raise InputError("jobs must be >= 1")

    @property
    def seeds(self) -> range:
        return range(self.seed_base, self.seed_base + self.n_seeds)
