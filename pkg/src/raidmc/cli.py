"""Command-line entry points: run a config file or a named built-in suite.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import configparser
import sys

from .distributions import ParameterError
from .experiments import SUITES, default_out_dir, load_config, run, run_suite


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="raidmc",
        description="Monte Carlo dependability simulator for RAID/PMDS disk arrays")
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("run", help="run one experiment from a config file")
    pr.add_argument("config", help="INI-style experiment config")
    pr.add_argument("--out", default=None, help="output directory")
    pr.add_argument("--threads", type=int, default=1)

    ps = sub.add_parser("suite", help="run a named built-in experiment suite")
    ps.add_argument("name", help="one of: " + ", ".join(sorted(SUITES)))
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--out", default=None, help="output directory")
    ps.add_argument("--threads", type=int, default=1)
    ps.add_argument("--confidence", type=int, choices=(90, 95, 99), default=95)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            try:
                config = load_config(args.config)
            except (OSError, KeyError, ValueError, configparser.Error) as exc:
                print(f"config error: {exc}", file=sys.stderr)
                return 1
            run(config, args.out or default_out_dir(), threads=args.threads)
        else:
            run_suite(args.name, seed=args.seed,
                      out_dir=args.out or default_out_dir(),
                      threads=args.threads)
    except ParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
