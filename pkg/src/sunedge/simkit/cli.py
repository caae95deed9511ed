"""Command line entry point: run, sweep, validate, oracle."""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from ..baselines import StrategyKind
from ..sbeo import Infeasible, TooLarge, brute_force_solve, check_feasible, objective
from .config import ConfigError, ScenarioConfig, config_from_dict, load_config
from .engine import simulate
from .export import ExportError, fmt
from .random_instances import random_tiny_instance
from .run import run_simulation
from .scenario import build_scenario

SEASONS = {"spring": 80, "summer": 172, "autumn": 266, "winter": 355}


def _config(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else config_from_dict({})
    if args.seed is not None:
        cfg = cfg.with_overrides(seed=args.seed)
    if getattr(args, "strategy", None):
        cfg = cfg.with_overrides(strategy=args.strategy)
    return cfg


def cmd_run(args) -> int:
    cfg = _config(args)
    out = run_simulation(cfg)
    files = out.export(args.out)
    s = out.report.summary()
    print(f"{cfg.strategy}: max DoD {s['global_max_dod']:.4f}, avg DoD {s['average_dod']:.4f}, "
          f"miss rate {s['deadline_miss_rate']:.4f}, {s['num_tasks']} tasks")
    for f in files:
        print(f"  wrote {f}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args)
    seasons = args.seasons.split(",") if args.seasons else list(SEASONS)
    levels = [int(x) for x in args.power_levels.split(",")] if args.power_levels else [cfg.power_level]
    strategies = (args.strategies.split(",") if args.strategies
                  else [args.strategy] if args.strategy else [k.value for k in StrategyKind])
    out_dir = Path(args.out)
    rows = []
    for season, level in itertools.product(seasons, levels):
        if season not in SEASONS:
            raise ConfigError("--seasons", f"unknown season {season!r}")
        point = cfg.with_overrides(
            constellation=replace(cfg.constellation, epoch_day_of_year=SEASONS[season]),
            power_level=level, power=replace(cfg.power, p_cp=float(level)))
        scenario = build_scenario(point)
        for name in strategies:
            run = run_simulation(point.with_overrides(strategy=name), scenario=scenario)
            run.export(out_dir / f"{season}_{level}W_{name}")
            s = run.report.summary()
            rows.append((season, level, name, fmt(s["global_max_dod"]), fmt(s["average_dod"]),
                         fmt(s["deadline_miss_rate"]), fmt(s["lifetime_years"]["min"]),
                         fmt(s["lifetime_years"]["mean"])))
            print(f"{season:7s} {level:3d}W {name:20s} max DoD {s['global_max_dod']:.4f} "
                  f"avg {s['average_dod']:.4f} miss {s['deadline_miss_rate']:.4f}")
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("season", "power_level", "strategy", "max_dod", "avg_dod", "miss_rate",
                    "min_lifetime_years", "mean_lifetime_years"))
        w.writerows(rows)
    return 0


def cmd_validate(args) -> int:
    cfg = _config(args)
    print(f"ok: {cfg.constellation.num_sats} satellites, {len(cfg.stations)} stations, "
          f"{cfg.num_slots} slots, strategy {cfg.strategy}")
    return 0


def cmd_oracle(args) -> int:
    rng = np.random.default_rng(args.seed or 0)
    strategy = args.strategy or StrategyKind.SunlightAware.value
    rows = []
    for n in range(args.instances):
        inst = random_tiny_instance(rng)
        res = simulate(inst, strategy)
        clean = not check_feasible(inst, res.solution)
        h = objective(inst, res.solution)
        try:
            o = objective(inst, brute_force_solve(inst))
        except (Infeasible, TooLarge) as exc:
            o = None
            status = type(exc).__name__
        else:
            status = "ok" if clean else "heuristic_infeasible"
        rows.append((n, inst.num_sats, len(inst.tasks), inst.horizon, fmt(h), fmt(o),
                     fmt(None if o is None else h - o), status))
    compared = [r for r in rows if r[-1] == "ok"]
    gaps = [float(r[6]) for r in compared]
    matched = sum(g <= 1e-9 for g in gaps)
    print(f"{strategy} vs oracle on {len(compared)} comparable instances: "
          f"matched {matched}, mean gap {np.mean(gaps) if gaps else 0.0:.6f}, "
          f"dominance violations {sum(g < -1e-12 for g in gaps)}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "oracle.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("instance", "sats", "tasks", "slots", "heuristic", "oracle", "gap", "status"))
            w.writerows(rows)
        (out / "summary.json").write_text(json.dumps(
            {"strategy": strategy, "compared": len(compared), "matched": matched,
             "mean_gap": float(np.mean(gaps)) if gaps else 0.0}, indent=2, sort_keys=True) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sunedge", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_default="out"):
        sp.add_argument("--config", help="scenario YAML (defaults to the desk-scale preset)")
        sp.add_argument("--out", default=out_default, help="output directory")
        sp.add_argument("--seed", type=int, help="random seed")
        sp.add_argument("--strategy", choices=[k.value for k in StrategyKind])

    common(sub.add_parser("run", help="simulate one scenario"))
    sw = sub.add_parser("sweep", help="grid over seasons, power levels and strategies")
    common(sw)
    sw.add_argument("--seasons", help=f"comma list from {','.join(SEASONS)}")
    sw.add_argument("--power-levels", help="comma list of watts, e.g. 30,50,60")
    sw.add_argument("--strategies", help="comma list of strategy names")
    common(sub.add_parser("validate", help="check a config file"))
    orc = sub.add_parser("oracle", help="tiny random instances: heuristic vs brute force")
    common(orc, out_default=None)
    orc.add_argument("--instances", type=int, default=50)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must fit in an unsigned 64-bit integer", file=sys.stderr)
        return 2
    handler = {"run": cmd_run, "sweep": cmd_sweep, "validate": cmd_validate,
               "oracle": cmd_oracle}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ExportError as exc:
        print(f"export error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
