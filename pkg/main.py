#!/usr/bin/env python
import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from harness.config import RunConfig, config_from_text, parse_config
from harness.report import report
from harness.runner import run
from utils.console import print_markdown, print_step, print_substep, set_quiet
from utils.exceptions import ConfigError, LabError

__VERSION__ = "1.0.0"

EXIT_OK = 0
EXIT_IO = 4

RUN_MODES = {
    "simulate": "evolve the perturbation system from seeded symmetric data",
    "linear": "evolve the linearized system (quadratic terms dropped)",
    "inequalities": "ensemble surveys of the functional inequalities",
    "sweep": "one child run per configured amplitude, in parallel",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mhdlab", description="Pseudo-spectral lab for 2D non-resistive MHD around a rotating magnetic equilibrium"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__VERSION__}")
    commands = parser.add_subparsers(dest="command", required=True)
    for mode, help_text in RUN_MODES.items():
        sub = commands.add_parser(mode, help=help_text)
        sub.add_argument("--config", type=Path, default=None, help="TOML run file (defaults apply when omitted)")
        sub.add_argument("--seed", type=int, default=None, help="Override initial.seed")
        sub.add_argument("--out", type=Path, default=None, help="Override output.directory")
        sub.add_argument("--quiet", action="store_true", help="No console output")
    sub = commands.add_parser("report", help="summary tables over finished runs")
    sub.add_argument("records", nargs="*", type=Path, help="Run directories or record.json files")
    sub.add_argument("--out", type=Path, default=Path("report"), help="Where summary.csv goes")
    sub.add_argument("--quiet", action="store_true", help="No console output")
    return parser


def load_config(args) -> RunConfig:
    config = parse_config(args.config) if args.config else config_from_text("", "<defaults>")
    config = replace(config, mode=args.command, solver=replace(config.solver, linear=args.command == "linear"))
    return config.with_overrides(seed=args.seed, out=args.out)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    set_quiet(args.quiet)
    print_markdown(f"### mhdlab {__VERSION__}")
    try:
        if args.command == "report":
            _, failures = report(args.records, args.out)
            return EXIT_IO if failures else EXIT_OK
        record = run(load_config(args))
        return record.exit_code
    except ConfigError as err:
        print_step(f"Configuration error:\n{err}")
        return err.exit_code
    except LabError as err:
        print_substep(str(err), style="bold red")
        return err.exit_code
    except OSError as err:
        print_substep(f"I/O error: {err}", style="bold red")
        return EXIT_IO
    except KeyboardInterrupt:
        print_substep("Interrupted", style="bold red")
        return 130


if __name__ == "__main__":
    sys.exit(main())
