from __future__ import annotations

import copy
import math
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

import yaml

from src.core.errors import ConfigError
from src.envgen.field import FieldParams
from src.harness.config import POLICY_KINDS, ExperimentConfig, PolicySpec
from src.harness.policies import policy_params
from src.ope.events import SchemaMapping

# Keep in sync with config/quickdraw_default.yaml.
DEFAULT_CONFIG: Dict[str, Any] = {
    "field": {
        "rho_x": 0.1,
        "rho_t": 0.1,
        "alpha": 1.0,
        "sigma_noise": 0.0,
        "K": 1000,
        "T": 1000,
        "tau_s": 0.001,
    },
    "experiment": {
        "seed": 0,
        "n_seeds": 20,
        "warmup_rounds": 100,
        "jobs": 1,
    },
    "run": {
        "policies": ["quickdraw", "greedy", "restless", "sw_gp_ucb", "random"],
    },
    "policies": {
        "quickdraw": {
            "kind": "quickdraw", "ell_x": 1.0, "ell_t": 1.0, "rho2": 1.0e-7,
            "gamma_mode": "fixed", "gamma": 2.0, "L": 1.0, "delta": 0.05,
            "truncation": None, "ceiling": 1.0,
        },
        "greedy": {"kind": "greedy", "epsilon": 0.1, "window": 100},
        "restless": {"kind": "restless", "sigma_r": 0.1},
        "sw_gp_ucb": {
            "kind": "sw_gp_ucb", "window": 100, "amplitude": 1.0, "lengthscale": 0.1,
            "noise": 0.01, "ucb_beta": 4.0, "hyperopt": "grid",
            "grid": {
                "lengthscales": [0.03, 0.1, 0.3, 1.0],
                "amplitudes": [0.25, 1.0],
                "noises": [1.0e-4, 1.0e-2],
            },
        },
        "sliding_ucb": {"kind": "sliding_ucb", "window": 100, "xi": 0.5, "B": 1.0},
        "random": {"kind": "random"},
        "oracle": {"kind": "oracle"},
    },
    "sweep": {
        "variable": None,
        "values": [],
    },
    "bench": {
        "t_values": [100, 250, 500, 1000],
        "K": 100,
    },
    "outputs": {
        "out_dir": "results",
        "traces": False,
        "wall_time": False,
    },
    "ope": {
        "log": None,
        "schema": {
            "timestamp": "timestamp",
            "action": "action",
            "reward": "reward",
            "pscore": "pscore",
            "item_feature": "item_feature",
            "user_features": [],
        },
        "policies": ["quickdraw", "greedy", "restless", "sw_gp_ucb", "random"],
        "n_trials": 10,
        "interval_length": 1000,
        "update_rule": "all",
        "max_weight": None,
        "ell_t_values": [],
        "synthetic": {
            "K": 46,
            "T": 50000,
            "n_groups": 1,
            "n_grid": 200,
            "ctr_max": 0.95,
            "rho_x": 0.1,
            "rho_t": 0.1,
            "surface": "bump",
        },
    },
}

# mappings whose keys are user-chosen names
OPEN_PATHS = ("policies",)
# null by default but numeric when set
NULLABLE_FLOATS = ("truncation", "max_weight")


def _coerce(default: Any, value: Any, path: str) -> Any:
    """Bring a user value to the type of its default (YAML 1.1 reads '1e-3' as a string)."""
    leaf = path.rsplit(".", 1)[-1]
    if value is None:
        return None
    try:
        if isinstance(default, bool):
            if not isinstance(value, bool):
                raise ValueError
            return value
        if isinstance(default, int):
            f = float(value)
            if not f.is_integer():
                raise ValueError
            return int(f)
        if isinstance(default, float):
            return float(value)
        if default is None and leaf in NULLABLE_FLOATS:
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {path}: {value!r}") from None
    return value


def merge(base: Mapping[str, Any], update: Mapping[str, Any], path: str = "") -> Dict[str, Any]:
    """
    Deep-merge `update` over `base`, rejecting keys absent from `base`
    except below the open mappings.
    """
    out = copy.deepcopy(dict(base))
    for k, v in update.items():
        where = f"{path}.{k}" if path else str(k)
        if k not in out:
            if path not in OPEN_PATHS:
                raise ConfigError(f"unknown key: {k} (at {where})")
            if not isinstance(v, dict):
                raise ConfigError(f"{where} must be a mapping")
            template = DEFAULT_CONFIG["policies"].get(v.get("kind"))
            if template is None:
                raise ConfigError(f"{where}.kind must be one of {POLICY_KINDS}")
            # a new named policy starts from the defaults of its kind
            out[k] = merge(template, v, where)
            continue
        if isinstance(out[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"{where} must be a mapping")
            out[k] = merge(out[k], v, where)
        else:
            out[k] = _coerce(out[k], v, where)
    return out


def load_config(path: Optional[Path] = None, overrides: Sequence[str] = ()) -> Dict[str, Any]:
    """Defaults < YAML file < `dotted.key=value` overrides."""
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            user = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"cannot parse {path}: {e}") from e
        if not isinstance(user, dict):
            raise ConfigError(f"{path} must hold a mapping")
        cfg = merge(cfg, user)
    for item in overrides:
        cfg = merge(cfg, parse_override(item))
    return cfg


def parse_override(item: str) -> Dict[str, Any]:
    if "=" not in item:
        raise ConfigError(f"override must look like dotted.key=value, got {item!r}")
    key, raw = item.split("=", 1)
    parts = [p for p in key.strip().split(".") if p]
    if not parts:
        raise ConfigError(f"empty key in override {item!r}")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse value in override {item!r}: {e}") from e
    tree: Dict[str, Any] = {parts[-1]: value}
    for p in reversed(parts[:-1]):
        tree = {p: tree}
    return tree


def policy_spec(cfg: Mapping[str, Any], name: str) -> PolicySpec:
    blocks = cfg["policies"]
    if name not in blocks:
        raise ConfigError(f"unknown policy: {name} (define it under policies.{name})")
    block = dict(blocks[name])
    kind = block.pop("kind", None)
    if kind not in POLICY_KINDS:
        raise ConfigError(f"policies.{name}.kind must be one of {POLICY_KINDS}, got {kind!r}")
    if kind != name and name in DEFAULT_CONFIG["policies"]:
        raise ConfigError(f"policies.{name}.kind cannot change a built-in policy")
    # drop nulls so parameter defaults apply, except where null is meaningful
    params = {k: v for k, v in block.items() if v is not None or k in ("truncation", "ceiling", "window")}
    spec = PolicySpec(name=name, kind=kind, params=params)
    policy_params(spec)
    return spec


def split_names(names) -> List[str]:
    if isinstance(names, str):
        return [n.strip() for n in names.split(",") if n.strip()]
    return [str(n) for n in names]


def policy_specs(cfg: Mapping[str, Any], names: Sequence[str]) -> List[PolicySpec]:
    if not names:
        raise ConfigError("no policies selected")
    return [policy_spec(cfg, n) for n in names]


def field_params(cfg: Mapping[str, Any]) -> FieldParams:
    f = cfg["field"]
    return FieldParams(seed=int(cfg["experiment"]["seed"]), **f)


def experiment_config(cfg: Mapping[str, Any], names: Optional[Sequence[str]] = None) -> ExperimentConfig:
    e, o = cfg["experiment"], cfg["outputs"]
    names = split_names(names if names is not None else cfg["run"]["policies"])
    return ExperimentConfig(
        field=field_params(cfg),
        policies=tuple(policy_specs(cfg, names)),
        warmup_rounds=int(e["warmup_rounds"]),
        n_seeds=int(e["n_seeds"]),
        seed_base=int(e["seed"]),
        out_dir=Path(o["out_dir"]) if o["out_dir"] else None,
        traces=bool(o["traces"]),
        wall_time=bool(o["wall_time"]),
        jobs=int(e["jobs"]),
    )


def schema_mapping(cfg: Mapping[str, Any]) -> SchemaMapping:
    return SchemaMapping.from_dict(cfg["ope"]["schema"])


def _flatten(tree: Mapping[str, Any], prefix: str = "") -> List[str]:
    lines = []
    for k, v in tree.items():
        key = f"{prefix}.{k}" if prefix else str(k)
        if isinstance(v, dict) and v:
            lines.extend(_flatten(v, key))
        else:
            if isinstance(v, float) and math.isinf(v):
                shown = ".inf"
            else:
                shown = yaml.safe_dump(v, default_flow_style=True).replace("\n...", "").strip()
            lines.append(f"  {key} = {shown}")
    return lines


def describe_defaults() -> str:
    """Every config key and its default, one per line (used as the --help epilog)."""
    return "config keys (defaults):\n" + "\n".join(_flatten(DEFAULT_CONFIG))
