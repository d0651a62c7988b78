# -*- coding: utf-8 -*-
#
# Copyright 2026 The mlmcdrop developers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Command-line entry point: ``mlmcdrop <command> -c config.json``.

Exit codes: 0 on success, 2 for configuration and weight-file errors, 3 for
an infeasible budget and 4 for a non-finite estimate.

"""

__all__ = ["main", "build_parser", "EXIT_OK", "EXIT_CONFIG", "EXIT_INFEASIBLE", "EXIT_NUMERIC"]

import argparse
import logging
import sys

from ..allocation.optimal import InfeasibleBudgetError
from ..estimators.single_fidelity import NonFiniteEstimateError
from ..layer.mlp import WeightFileError
from ..version import __version__
from . import commands
from .config import ConfigError, load_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERIC = 4

_COMMANDS = {
    "estimate": (commands.cmd_estimate, "Run the MLMC estimators over the grid."),
    "rate-study": (commands.cmd_rate_study, "Variance decay with the inner fidelity."),
    "allocate": (commands.cmd_allocate, "Optimal allocation for a budget."),
    "fixed-cost": (commands.cmd_fixed_cost, "Variance surface over all allocations of a budget."),
    "ladder": (commands.cmd_ladder, "Inspect a fidelity ladder."),
    "bands": (commands.cmd_bands, "Single-fidelity confidence bands."),
}


def build_parser():
    """
    The argument parser with one sub-command per study.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-c", "--config", required=True, help="Path of the JSON run configuration"
    )
    common.add_argument(
        "-o",
        "--output",
        default=None,
        help="Output directory, overriding output.directory of the configuration",
    )
    common.add_argument(
        "--no-timestamp",
        dest="timestamp",
        action="store_false",
        default=None,
        help="Write directly into the output directory and omit the wall-clock time",
    )
    common.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Log progress (-v for INFO, -vv for DEBUG)",
    )

    parser = argparse.ArgumentParser(
        prog="mlmcdrop",
        description="Multilevel Monte Carlo estimation of MC-dropout predictive moments.",
    )
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    subparsers = parser.add_subparsers(dest="command")
    subparsers.required = True
    for name, (_, help_text) in _COMMANDS.items():
        subparsers.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def _log_level(verbose):
    if verbose >= 2:
        return logging.DEBUG
    if verbose == 1:
        return logging.INFO
    return logging.WARNING


def main(argv=None):
    """
    Runs one command and returns the process exit code.
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=_log_level(args.verbose),
        format="%(asctime)s %(name)s %(levelname)s: %(message)s",
    )

    command, _ = _COMMANDS[args.command]
    try:
        config = load_config(args.config)
        envelope = command(config, directory=args.output, timestamp=args.timestamp)
    except (ConfigError, WeightFileError) as e:
        logger.error("configuration error: %s", e)
        return EXIT_CONFIG
    except InfeasibleBudgetError as e:
        logger.error("infeasible budget: %s", e)
        return EXIT_INFEASIBLE
    except NonFiniteEstimateError as e:
        logger.error("numeric failure: %s", e)
        return EXIT_NUMERIC
    except ValueError as e:
        logger.error("invalid parameters: %s", e)
        return EXIT_CONFIG

    print(envelope.directory)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
