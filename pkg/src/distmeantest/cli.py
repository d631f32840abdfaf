"""Command-line front end.

    distmeantest run       --config cfg.json --trials 300 --out trials.csv
    distmeantest calibrate --config cfg.json --target 0.1
    distmeantest sweep     --config cfg.json --param s --values 0,28,84

Exit codes: 0 success, 2 audit violation (some transcript exceeded a bit
budget), 3 infeasible configuration (malformed config, impossible layout, or
calibration that cannot reach its target).
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import MeanTestError
from .harness import (
    PopulationConfig,
    calibrate,
    estimate_error,
    run_batch,
    write_records_csv,
)

EXIT_OK = 0
EXIT_AUDIT = 2
EXIT_INFEASIBLE = 3


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="population config JSON")
    p.add_argument("--trials", type=int, default=200, help="trials per mean mode")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--path", choices=("law", "literal"), default="law",
                   help="transcript sampling path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="distmeantest",
        description="Simulate communication-bounded distributed Gaussian mean tests.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="estimate error rates for one population")
    _add_common(run_p)
    run_p.add_argument("--out", help="write per-trial records as CSV")
    run_p.add_argument("--json", dest="json_out", help="write the summary JSON here")
    run_p.add_argument("--no-timing", action="store_true",
                       help="zero the wall_micros column for reproducible output")

    cal_p = sub.add_parser("calibrate", help="double the population until the target holds")
    _add_common(cal_p)
    cal_p.add_argument("--target", type=float, default=0.1, help="worst-rate target")
    cal_p.add_argument("--max-multiplier", type=int, default=1 << 14)
    cal_p.add_argument("--json", dest="json_out")

    sweep_p = sub.add_parser("sweep", help="re-estimate while varying one parameter")
    _add_common(sweep_p)
    sweep_p.add_argument("--param", choices=("s", "epsilon", "ell"), required=True)
    sweep_p.add_argument("--values", required=True,
                         help="comma-separated values for the swept parameter")
    sweep_p.add_argument("--out", help="write the sweep table as CSV (default stdout)")
    return parser


def _with_param(config: PopulationConfig, param: str, value: float) -> PopulationConfig:
    base = config.to_dict()
    base.pop("partition", None)  # layouts change with the swept parameter
    if param == "s":
        base["s"] = int(value)
    elif param == "epsilon":
        base["epsilon"] = value
    else:
        base["users"] = [{"m": u["m"], "ell": int(value), "count": u["count"]}
                         for u in base["users"]]
    return PopulationConfig.from_dict(base)


def _cmd_run(args) -> int:
    config = PopulationConfig.from_json_file(args.config)
    batch = run_batch(config, args.trials, master_seed=args.seed,
                      sample_path=args.path, timing=not args.no_timing)
    if args.out:
        write_records_csv(batch.records, args.out)
    est = batch.estimate
    summary = {
        "protocol": config.protocol, "d": config.d, "epsilon": config.epsilon,
        "s": config.s, "n_users": config.n_users(), "trials": est.trials,
        "type1_rate": est.type1_rate, "type2_rates": est.type2_rates,
        "ci_halfwidth": est.ci_halfwidth,
        "audit_violations": len(batch.audit_violations),
    }
    text = json.dumps(summary, indent=2, sort_keys=True)
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    if batch.audit_violations:
        for line in batch.audit_violations[:20]:
            print(f"audit: {line}", file=sys.stderr)
        return EXIT_AUDIT
    return EXIT_OK


def _cmd_calibrate(args) -> int:
    config = PopulationConfig.from_json_file(args.config)
    result = calibrate(config, args.target, trials=args.trials, master_seed=args.seed,
                       max_multiplier=args.max_multiplier, sample_path=args.path)
    summary = {
        "protocol": config.protocol, "target": args.target,
        "multiplier": result.multiplier, "n_users": result.n_users,
        "worst_rate": result.estimate.worst_rate,
        "type1_rate": result.estimate.type1_rate,
        "type2_rates": result.estimate.type2_rates,
        "scaling_constant": result.scaling_constant,
    }
    text = json.dumps(summary, indent=2, sort_keys=True)
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = PopulationConfig.from_json_file(args.config)
    values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    if not values:
        raise MeanTestError("sweep needs at least one value")
    alt_modes = [m for m in config.mean_modes if m != "null"]
    header = ["param", "value", "trials", "type1_rate"]
    header += [f"type2_{mode}" for mode in alt_modes]
    header.append("ci_halfwidth")
    rows = [",".join(header)]
    for value in values:
        variant = _with_param(config, args.param, value)
        est = estimate_error(variant, args.trials, master_seed=args.seed,
                             sample_path=args.path)
        cells = [args.param, f"{value:g}", str(est.trials), repr(est.type1_rate)]
        cells += [repr(est.type2_rates[mode]) for mode in alt_modes]
        cells.append(repr(est.ci_halfwidth))
        rows.append(",".join(cells))
    text = "\n".join(rows) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "calibrate":
            return _cmd_calibrate(args)
        return _cmd_sweep(args)
    except (MeanTestError, OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
