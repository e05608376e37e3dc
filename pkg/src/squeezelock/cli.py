"""Command-line entry point: ``squeezelock <scenario> [options]``."""

from __future__ import annotations

import argparse
import sys

from .config import SCENARIOS, load_config
from .exceptions import ConfigSchemaError, DomainError
from .scenarios import run, write_outputs

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_CONFIG = 2
EXIT_NOT_CONVERGED = 3


def build_parser():
    parser = argparse.ArgumentParser(prog="squeezelock", description="Coherently locked squeezed-vacuum simulator.")
    parser.add_argument("scenario", choices=SCENARIOS)
    parser.add_argument("--config", metavar="PATH", help="flat 'section.key = value' config file")
    parser.add_argument("--seed", type=int, help="master seed (overrides run.seed)")
    parser.add_argument("--out", metavar="DIR", help="output directory (overrides run.output_dir)")
    parser.add_argument("--check", action="store_true", help="exit non-zero if any scenario check fails")
    parser.add_argument(
        "--duration-scale", type=float, metavar="F", help="fraction of the full run to simulate (run.duration_scale)"
    )
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = {
        "run.scenario": args.scenario,
        "run.seed": args.seed,
        "run.output_dir": args.out,
        "run.duration_scale": args.duration_scale,
    }
    try:
        cfg = load_config(args.config, **overrides)
    except ConfigSchemaError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        for name in exc.fields:
            print(f"  bad field: {name}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except (DomainError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG

    result = run(cfg.scenario, cfg)
    for path in write_outputs(result, cfg.output_dir):
        print(path)
    for name in sorted(result.checks):
        print(f"{'PASS' if result.checks[name] else 'FAIL'} {name}")

    if cfg.scenario == "lock-demo" and not result.checks.get("all_converged", True):
        print(result.summary["report"], file=sys.stderr)
        return EXIT_NOT_CONVERGED
    if args.check and not result.passed:
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
