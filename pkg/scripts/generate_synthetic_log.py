from __future__ import annotations

import argparse
import json
from pathlib import Path

# Make sure imports work when running as "python scripts/generate_synthetic_log.py" from repo root
import sys
sys.path.append(str(Path(__file__).resolve().parents[1]))

from src.ope.events import SchemaMapping, save_schema
from src.ope.ingest import write_log
from src.ope.synth import synth_log, true_value


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data/synthetic", help="output directory")
    ap.add_argument("--K", type=int, default=46, help="number of actions")
    ap.add_argument("--T", type=int, default=20000, help="number of logged events")
    ap.add_argument("--groups", type=int, default=4, help="number of user groups")
    ap.add_argument("--n-grid", type=int, default=200, help="time resolution of the click surfaces")
    ap.add_argument("--ctr-max", type=float, default=0.1, help="largest click probability")
    ap.add_argument("--rho-x", type=float, default=0.1)
    ap.add_argument("--rho-t", type=float, default=0.1)
    ap.add_argument("--surface", choices=["field", "bump"], default="field",
                    help="drifting random field per group, or one moving hot spot")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    print(f"[INFO] K={args.K} T={args.T} groups={args.groups} seed={args.seed}")
    log = synth_log(K=args.K, T=args.T, seed=args.seed, n_groups=args.groups, n_grid=args.n_grid,
                    ctr_max=args.ctr_max, rho_x=args.rho_x, rho_t=args.rho_t, surface=args.surface)

    schema = SchemaMapping(user_features=("group",))
    csv_path = write_log(log.events, out / "log.csv", schema)
    schema_path = save_schema(schema, out / "schema.yaml")

    ctr = sum(e.reward for e in log.events) / max(len(log.events), 1)
    meta = {
        "generator": "generate_synthetic_log.py",
        "seed": args.seed,
        "K": args.K,
        "T": args.T,
        "groups": args.groups,
        "n_grid": args.n_grid,
        "ctr_max": args.ctr_max,
        "rho_x": args.rho_x,
        "rho_t": args.rho_t,
        "surface": args.surface,
        "logged_ctr": ctr,
        "true_value": {
            "oracle": true_value(log, "oracle"),
            "random": true_value(log, "random"),
        },
    }
    meta_path = out / "log.json"
    meta_path.write_text(json.dumps(meta, indent=2), encoding="utf-8")

    print(f"[OK] {csv_path}")
    print(f"[OK] {schema_path}")
    print(f"[OK] {meta_path}")
    print(f"[DONE] logged CTR={ctr:.4f}, oracle value={meta['true_value']['oracle']:.4f}")


if __name__ == "__main__":
    main()
