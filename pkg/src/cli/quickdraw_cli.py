from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from src.core.errors import ConfigError, EnsembleError, InputError, QuickDrawError
from src.harness.bench import bench_runtime
from src.harness.ensemble import run_ensemble, run_sweep
from src.ope.events import load_schema
from src.ope.ingest import ingest_log
from src.ope.ips import ell_t_sweep, evaluate_policies
from src.ope.segment import segment
from src.ope.synth import synth_log

from .config import describe_defaults, experiment_config, load_config, policy_specs, schema_mapping, split_names

log = logging.getLogger("quickdraw")

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


def parse_floats(text: str, what: str) -> List[float]:
    items = [s.strip() for s in (text or "").split(",") if s.strip()]
    if not items:
        raise ConfigError(f"{what} needs at least one comma-separated value")
    try:
        return [float(s) for s in items]
    except ValueError:
        raise ConfigError(f"{what}: cannot parse {text!r} as comma-separated numbers") from None


def parse_ints(text: str, what: str) -> List[int]:
    vals = parse_floats(text, what)
    if any(not v.is_integer() or v < 1 for v in vals):
        raise ConfigError(f"{what} must be positive integers, got {text!r}")
    return [int(v) for v in vals]


def _resolve(args: argparse.Namespace) -> Dict[str, Any]:
    """Config file and --set overrides, then the explicit flags on top."""
    cfg = load_config(Path(args.config) if args.config else None, args.set or ())
    e, o = cfg["experiment"], cfg["outputs"]
    if args.seed is not None:
        e["seed"] = args.seed
    if args.seeds is not None:
        e["n_seeds"] = args.seeds
    if args.jobs is not None:
        e["jobs"] = args.jobs
    if args.out is not None:
        o["out_dir"] = args.out
    return cfg


def _out_dir(cfg: Dict[str, Any]) -> Path:
    return Path(cfg["outputs"]["out_dir"] or "results")


def _show(title: str, df: pd.DataFrame) -> None:
    print(f"[INFO] {title}")
    print(df.to_string(index=False))


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    names = split_names(args.policies) if args.policies else None
    config = experiment_config(cfg, names)
    res = run_ensemble(config)
    _show(f"mean regret over {config.n_seeds} seed(s), K={config.field.K} T={config.field.T}", res.summary)
    print(f"[DONE] wrote {_out_dir(cfg) / 'ensemble.csv'}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    variable = args.var or cfg["sweep"]["variable"]
    if not variable:
        raise ConfigError("sweep needs --var (or sweep.variable)")
    if args.values is not None:
        values = parse_floats(args.values, "--values")
    else:
        values = [float(v) for v in cfg["sweep"]["values"]]
        if not values:
            raise ConfigError("sweep needs --values (or sweep.values)")
    names = split_names(args.policies) if args.policies else None
    config = experiment_config(cfg, names)
    table = run_sweep(config, variable, values)
    _show(f"sweep over {variable}", table)
    print(f"[DONE] wrote {_out_dir(cfg) / 'sweep.csv'}")
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    if args.tmax is not None:
        t_values = parse_ints(args.tmax, "--tmax")
    else:
        t_values = [int(t) for t in cfg["bench"]["t_values"]]
    table = bench_runtime(t_values, K=int(cfg["bench"]["K"]), seed=int(cfg["experiment"]["seed"]),
                          rho_x=float(cfg["field"]["rho_x"]), out_dir=_out_dir(cfg))
    _show("cumulative selection time (seconds)", table)
    print(f"[DONE] wrote {_out_dir(cfg) / 'bench.csv'}")
    return EXIT_OK


def cmd_ope(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    o = cfg["ope"]
    seed = int(cfg["experiment"]["seed"])
    truth = None
    if args.synthetic:
        s = o["synthetic"]
        truth = synth_log(K=int(s["K"]), T=int(s["T"]), seed=seed, n_groups=int(s["n_groups"]),
                          n_grid=int(s["n_grid"]), ctr_max=float(s["ctr_max"]),
                          rho_x=float(s["rho_x"]), rho_t=float(s["rho_t"]), surface=str(s["surface"]))
        events = truth.events
    else:
        path = args.log or o["log"]
        if not path:
            raise ConfigError("ope needs --log (or ope.log) unless --synthetic is given")
        schema = load_schema(Path(args.schema)) if args.schema else schema_mapping(cfg)
        events = ingest_log(Path(path), schema)

    segments = segment(events, interval_length=int(o["interval_length"]))
    if not segments:
        raise InputError("no evaluable segments in the log")
    names = split_names(args.policies) if args.policies else split_names(o["policies"])
    specs = policy_specs(cfg, names)
    kw = dict(n_trials=int(o["n_trials"]), seed=seed, update_rule=o["update_rule"],
              max_weight=o["max_weight"], truth=truth, jobs=int(cfg["experiment"]["jobs"]))
    res = evaluate_policies(specs, segments, out_dir=_out_dir(cfg), **kw)
    _show(f"IPS value over {kw['n_trials']} trial(s), {len(segments)} segment(s)", res.summary)

    if o["ell_t_values"]:
        qd = next((s for s in specs if s.kind == "quickdraw"), None) or policy_specs(cfg, ["quickdraw"])[0]
        table = ell_t_sweep(qd, segments, [float(v) for v in o["ell_t_values"]], out_dir=_out_dir(cfg), **kw)
        _show(f"{qd.name} value versus ell_t", table)
    print(f"[DONE] wrote {_out_dir(cfg) / 'ope_summary.csv'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="YAML config (see config/quickdraw_default.yaml)")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config key, e.g. field.rho_t=.inf (repeatable)")
    common.add_argument("--seed", type=int, default=None, help="base seed (experiment.seed)")
    common.add_argument("--seeds", type=int, default=None, help="number of seeds (experiment.n_seeds)")
    common.add_argument("--jobs", type=int, default=None, help="worker processes (experiment.jobs)")
    common.add_argument("--out", default=None, help="output directory (outputs.out_dir)")
    common.add_argument("--policies", default=None, help="comma-separated policy names")
    common.add_argument("--verbose", action="store_true", help="debug logging")

    ap = argparse.ArgumentParser(
        prog="quickdraw",
        description="Nonstationary continuum-armed bandit simulations and off-policy evaluation.",
        epilog=describe_defaults(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="run an ensemble over seeds")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", parents=[common], help="ensembles over one varied parameter")
    p.add_argument("--var", default=None, help="sigma_noise|alpha|rho_x|rho_t|ell_x|ell_t")
    p.add_argument("--values", default=None, help="comma-separated values, e.g. 0,0.05,0.1")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", parents=[common], help="selection runtime versus horizon")
    p.add_argument("--tmax", default=None, help="comma-separated horizons, e.g. 100,250,500")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("ope", parents=[common], help="IPS evaluation on a logged-feedback CSV")
    p.add_argument("--log", default=None, help="log CSV (columns named by ope.schema)")
    p.add_argument("--schema", default=None, help="schema mapping YAML (replaces ope.schema)")
    p.add_argument("--synthetic", action="store_true", help="evaluate on a generated log instead")
    p.set_defaults(func=cmd_ope)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="[%(levelname)s] %(message)s", force=True)
    try:
        return args.func(args)
    except (ConfigError, InputError) as e:
        log.error("%s", e)
        return EXIT_USAGE
    except EnsembleError as e:
        log.error("seed %d failed: %s", e.seed, e)
        return EXIT_FAILURE
    except QuickDrawError as e:
        log.error("%s", e)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
