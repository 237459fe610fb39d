"""Command line interface.

Subcommands: solve (single equilibrium), sweep (warm-started parameter
sweep), zeronoise (vanishing-noise study), check (oracle suite), schema
(print the config JSON schema). Exit codes: 0 ok, 2 config error, 3 solver
failure, 4 self-check failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .config import config_schema, load_config
from .errors import ConfigError
from .runner import EXIT_CHECK, EXIT_CONFIG, run_scenario
from .selfcheck import self_check


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", required=True, help="scenario JSON file")
    p.add_argument("--out", default=None, help="output directory override")
    p.add_argument("--nodes", type=int, default=None, help="nodes per axis override")
    p.add_argument("--quiet", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cityeq",
        description="Spatial labor-market equilibria on city grids: wages, "
        "density, rents and commuting/telework allocations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve the scenario once, ignoring any sweep")
    _add_common(p_solve)

    p_sweep = sub.add_parser("sweep", help="run the scenario's parameter sweep")
    _add_common(p_sweep)
    p_sweep.add_argument(
        "--reverse", action="store_true",
        help="run the sweep values in reverse order (branch-dependence probe)",
    )

    p_zero = sub.add_parser("zeronoise", help="vanishing-noise continuation study")
    _add_common(p_zero)

    p_check = sub.add_parser("check", help="run the built-in oracle suite")
    p_check.add_argument("--quiet", action="store_true")
    p_check.add_argument("--mc-draws", type=int, default=10**5)

    sub.add_parser("schema", help="print the scenario config JSON schema")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "schema":
        print(json.dumps(config_schema(), indent=2))
        return 0

    if args.command == "check":
        report = self_check(mc_draws=args.mc_draws, quiet=args.quiet)
        return 0 if report.passed else EXIT_CHECK

    try:
        config = load_config(
            args.config, nodes_override=args.nodes, out_override=args.out
        )
        if args.command == "solve":
            if config.mode == "zero-noise-study":
                raise ConfigError(
                    "use the zeronoise subcommand for zero-noise-study configs",
                    field="mode",
                )
            config = dataclasses.replace(config, sweep=None)
        elif args.command == "sweep":
            if config.sweep is None:
                raise ConfigError("scenario has no sweep section", field="sweep")
        elif args.command == "zeronoise":
            if config.mode == "telework":
                raise ConfigError(
                    "the zero-noise study covers the base model only "
                    "(single-input technologies)",
                    field="mode",
                )
            config = dataclasses.replace(config, mode="zero-noise-study")
            if not config.sigma_list:
                config = dataclasses.replace(
                    config, sigma_list=[0.1, 0.05, 0.02, 0.01, 0.005]
                )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    reverse = bool(getattr(args, "reverse", False))
    outcome = run_scenario(config, reverse=reverse, quiet=args.quiet)
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
