"""
This script runs an experiment described by a JSON configuration file.

Usage:
------

.. code-block:: bash

    levysmooth_run_experiment --config psi-cauchy.json --out results --no-timestamp

Arguments:
----------

- **config**: Path of the JSON configuration.
- **out**: Overrides the artefact folder of the configuration.
- **threads**: Overrides the worker count of the configuration.
- **no-timestamp**: Omit the ``# generated`` line of the CSV file.
- **log-level**: Set the logging level (e.g., INFO, DEBUG).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import TYPE_CHECKING

from levysmooth.experiment import run_file

if TYPE_CHECKING:  # pragma: no cover
    from typing import Optional

logger = logging.getLogger(__name__)


def main(args: Optional[argparse.Namespace] = None) -> int:
    """
    Sets up logging, parses command-line arguments (if not provided),
    and runs the configuration file.

    Args:
        args: Command-line arguments. If None, arguments are parsed
            using `get_args`.

    Returns:
        The exit code of the experiment.
    """
    if args is None:
        args = get_args()

    logging.basicConfig(
        stream=sys.stdout,
        level=args.log_level,
        format="%(levelname)s:%(message)s",
    )

    logger.info(f"Loading configuration {args.config}")
    return run_file(
        args.config,
        output=args.out,
        threads=args.threads,
        timestamp=False if args.no_timestamp else None,
    )


def get_args() -> argparse.Namespace:
    """
    Parse command-line arguments and return them as an `argparse.Namespace` object.

    Returns:
        argparse.Namespace: The parsed command-line arguments, with attributes for each argument.
            - `log_level` (str): The logging level (default: "INFO").
            - `config` (Path): The configuration file.
            - `out` (Path): Artefact folder override.
            - `threads` (int): Worker count override.
            - `no_timestamp` (bool): Suppress the CSV timestamp line.
    """
    parser = argparse.ArgumentParser()

    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG", "NOTSET"],
    )

    parser.add_argument(
        "--config", type=Path, required=True, help="JSON experiment configuration."
    )

    parser.add_argument("--out", type=Path, default=None, help="Artefact folder.")

    parser.add_argument("--threads", type=int, default=None, help="Worker processes.")

    parser.add_argument(
        "--no-timestamp",
        action="store_true",
        help="Omit the generation timestamp line of the CSV file.",
    )

    return parser.parse_args()


if __name__ == "__main__":
    sys.exit(main())
