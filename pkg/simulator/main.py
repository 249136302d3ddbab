"""
Secure SWIPT simulator CLI
Two-timescale RIS phase design and short-term beamforming, run as Monte Carlo experiments
"""
import argparse
import logging
import os
import sys

import settings
from harness import load_experiment_config, run_experiment, sweep, with_override, write_run
from models import SCHEMES, ExperimentConfig

# Configure logging
logging.basicConfig(level=settings.log_level())
logger = logging.getLogger(__name__)


def _load(args) -> ExperimentConfig:
    ecfg = load_experiment_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        ecfg = with_override(ecfg, "seed", args.seed)
    return ecfg


def cmd_run(args) -> int:
    ecfg = _load(args)
    out_dir = settings.results_dir(args.out or ecfg.out_dir)
    logger.info(f"Running scheme {ecfg.scheme} with seed {ecfg.seed}")
    result = run_experiment(ecfg)
    for path in write_run(result, out_dir):
        logger.info(f"✅ Results written to {path}")
    return 1 if result.record.failed else 0


def cmd_sweep(args) -> int:
    ecfg = _load(args)
    parameter = args.param or ecfg.sweep_param
    if not parameter:
        logger.error("❌ No sweep parameter given (--param or sweep_param)")
        return 2
    if args.values:
        values = [v.strip() for v in args.values.split(",") if v.strip()]
    elif ecfg.sweep_values:
        values = ecfg.sweep_values
    else:
        logger.error("❌ No sweep values given (--values or sweep_values)")
        return 2
    schemes = [s.strip() for s in args.schemes.split(",")] if args.schemes else None
    out_dir = settings.results_dir(args.out or ecfg.out_dir)
    records = sweep(ecfg, parameter, values, schemes, os.path.join(out_dir, f"sweep_{parameter}.csv"))
    return 1 if any(r.failed for r in records) else 0


def cmd_validate(args) -> int:
    from validation import run_quick_validation

    return 0 if run_quick_validation(quick=args.quick) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="RIS-assisted secure SWIPT simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Monte Carlo run of one scheme")
    run.add_argument("--config", help="flat key=value config file")
    run.add_argument("--out", help="output directory")
    run.add_argument("--seed", type=int, help="master seed")
    run.set_defaults(func=cmd_run)

    sw = sub.add_parser("sweep", help="one run per parameter value")
    sw.add_argument("--config", help="flat key=value config file")
    sw.add_argument("--param", help="SystemConfig/ExperimentConfig field, or 'scheme'")
    sw.add_argument("--values", help="comma-separated values")
    sw.add_argument("--schemes", help=f"comma-separated subset of {', '.join(SCHEMES)}")
    sw.add_argument("--out", help="output directory")
    sw.add_argument("--seed", type=int, help="master seed")
    sw.set_defaults(func=cmd_sweep)

    val = sub.add_parser("validate", help="invariant smoke suite")
    val.add_argument("--quick", action="store_true", help="small instances only")
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as e:
        logger.error(f"❌ {args.command} failed: {e}")
        raise


if __name__ == "__main__":
    sys.exit(main())
