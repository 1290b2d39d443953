"""Experiment driver: run / sweep / validate with CSV and JSON emission.

Trials are independent across seeds (each owns its RNG derived from the
scenario seed and the trial index), so parallel execution merges to the
same aggregate as a serial run; rows are always written in sorted order.
"""

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .orchestrator import SCHEMES, run_baseline, run_bcd_aso
from .scenario import (
    ScenarioConfig,
    generate_channels,
    load_config,
    watts_to_dbm,
)
from .validation import run_validation_suite

CSV_COLUMNS = [
    "scheme", "P_dBm", "kappa_t", "kappa_r", "M", "N", "K", "seed",
    "sum_rate_bpshz", "iterations", "converged", "P_T_W", "P_A_W", "wall_time_s",
]


def run_trial(cfg, scheme, trial_seed):
    """One (scheme, seed) solve; deterministic given (cfg, trial_seed)."""
    rng = np.random.default_rng([cfg.seed, trial_seed])
    channels = generate_channels(cfg, rng)
    if scheme == "bcd_aso":
        report = run_bcd_aso(cfg, channels=channels, rng=rng)
    else:
        report = run_baseline(scheme, cfg, channels=channels, rng=rng)
    return report


def report_row(cfg, report, trial_seed):
    return {
        "scheme": report.scheme,
        "P_dBm": round(watts_to_dbm(cfg.p_budget), 6),
        "kappa_t": cfg.kappa_t,
        "kappa_r": cfg.kappa_r,
        "M": cfg.M,
        "N": cfg.N,
        "K": cfg.K,
        "seed": trial_seed,
        "sum_rate_bpshz": report.sum_rate,
        "iterations": report.iterations,
        "converged": report.converged,
        "P_T_W": report.p_t,
        "P_A_W": report.p_a,
        "wall_time_s": report.wall_time,
    }


def report_json(cfg, report, trial_seed, save_matrices=False):
    doc = {
        "config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in vars(cfg).items()},
        "scheme": report.scheme,
        "seed": trial_seed,
        "objective_trace": list(report.objective_trace),
        "fp_trace": list(report.fp_trace),
        "constraint_slacks": [list(s) for s in report.constraint_slacks],
        "iterations": report.iterations,
        "converged": report.converged,
        "wall_time_s": report.wall_time,
        "sum_rate_bpshz": report.sum_rate,
        "P_T_W": report.p_t,
        "P_A_W": report.p_a,
        "ris_active": report.ris_active,
        "kkt": report.kkt,
    }
    if save_matrices:
        doc["final_W"] = _complex_to_lists(report.final_W)
        doc["final_psi"] = _complex_to_lists(report.final_psi.psi)
    return doc


def _complex_to_lists(arr):
    arr = np.asarray(arr)
    return {"re": arr.real.tolist(), "im": arr.imag.tolist()}


def _trial_star(args):
    cfg, scheme, seed = args
    return (scheme, seed), run_trial(cfg, scheme, seed)


def run_trials(cfg, schemes, seeds, parallel=1):
    """All (scheme, seed) reports, merged deterministically."""
    jobs = [(cfg, scheme, seed) for scheme in schemes for seed in seeds]
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            results = dict(pool.map(_trial_star, jobs))
    else:
        results = dict(map(_trial_star, jobs))
    return {key: results[key] for key in sorted(results)}


def write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def cmd_run(args):
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    schemes = args.scheme or ["bcd_aso"]
    seeds = list(range(args.seeds))
    results = run_trials(cfg, schemes, seeds, args.parallel)
    rows = []
    for (scheme, seed), report in results.items():
        rows.append(report_row(cfg, report, seed))
        doc = report_json(cfg, report, seed, save_matrices=args.save_matrices)
        with open(out / f"run_{scheme}_seed{seed}.json", "w") as fh:
            json.dump(doc, fh, indent=1)
    write_csv(out / "runs.csv", rows)
    print(f"wrote {len(rows)} rows to {out / 'runs.csv'}")
    return 0


def sweep_configs(cfg, param, values):
    for value in values:
        if param == "power_dBm":
            yield value, cfg.with_updates(p_budget=10 ** ((value - 30.0) / 10.0))
        elif param == "kappa":
            yield value, cfg.with_updates(kappa_t=value, kappa_r=value)
        elif param == "kappa_t":
            yield value, cfg.with_updates(kappa_t=value)
        elif param == "kappa_r":
            yield value, cfg.with_updates(kappa_r=value)
        elif param == "M":
            yield value, cfg.with_updates(M=int(round(value)))
        else:
            raise ValueError(f"unknown sweep parameter {param!r}")


def cmd_sweep(args):
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    schemes = args.scheme or ["bcd_aso"]
    seeds = list(range(args.seeds))
    n_steps = int(round((args.to - getattr(args, "from")) / args.step)) if args.step else 0
    values = [getattr(args, "from") + i * args.step for i in range(n_steps + 1)]

    rows = []
    summary = []
    for value, point_cfg in sweep_configs(cfg, args.param, values):
        results = run_trials(point_cfg, schemes, seeds, args.parallel)
        for scheme in schemes:
            rates = []
            for seed in seeds:
                report = results[(scheme, seed)]
                rows.append(report_row(point_cfg, report, seed))
                rates.append(report.sum_rate)
            q1, med, q3 = np.percentile(rates, [25, 50, 75])
            summary.append(
                {
                    "param": args.param,
                    "value": value,
                    "scheme": scheme,
                    "median_sum_rate": med,
                    "q1_sum_rate": q1,
                    "q3_sum_rate": q3,
                    "n_seeds": len(seeds),
                }
            )
    write_csv(out / "sweep_runs.csv", rows)
    with open(out / "sweep_summary.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(summary[0].keys()))
        writer.writeheader()
        writer.writerows(summary)
    print(f"wrote {len(rows)} rows to {out / 'sweep_runs.csv'}")
    return 0


def cmd_validate(args):
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = run_validation_suite(cfg)
    path = out / "validation.json"
    with open(path, "w") as fh:
        json.dump(report, fh, indent=1)
    status = "PASS" if report["passed"] else "FAIL"
    for name, section in report.items():
        if isinstance(section, dict):
            print(f"{name}: {'pass' if section.get('passed', True) else 'FAIL'}")
    print(f"validation {status}; report at {path}")
    return 0 if report["passed"] else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="arisopt",
        description="Active-RIS multiuser MISO sum-rate experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="flat key=value config file")
    common.add_argument("--out", type=str, required=True, help="output directory")
    common.add_argument("--seeds", type=int, default=1, help="number of trial seeds")
    common.add_argument("--parallel", type=int, default=1, help="worker processes")
    common.add_argument(
        "--scheme", action="append", choices=SCHEMES,
        help="scheme to run (repeatable; default bcd_aso)",
    )

    p_run = sub.add_parser("run", parents=[common], help="solve at the configured point")
    p_run.add_argument("--save-matrices", action="store_true")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", parents=[common], help="grid sweep of one parameter")
    p_sweep.add_argument(
        "--param", required=True,
        choices=["power_dBm", "kappa", "M", "kappa_t", "kappa_r"],
    )
    p_sweep.add_argument("--from", type=float, required=True, dest="from")
    p_sweep.add_argument("--to", type=float, required=True)
    p_sweep.add_argument("--step", type=float, required=True)
    p_sweep.set_defaults(func=cmd_sweep)

    p_val = sub.add_parser("validate", parents=[common], help="run the oracle suite")
    p_val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
