"""
Command-line front-end of levysmooth. Every subcommand builds an experiment
configuration from its arguments and runs it, writing ``<out>/<name>.json``
and ``<out>/<name>.csv``.

Usage:
------

.. code-block:: bash

    levysmooth moments --measure '{"variant": "symmetric_stable", "b": 1, "beta": 0.5}' --xi 0.5 1
    levysmooth psi --process '{"variant": "stable", "beta": 1, "c": 1}' \\
        --function '{"variant": "indicator", "K": 0}' --n 100000 --seed 3 --out results
    levysmooth kfunc --couple sequence --input '[1, 0.25, 0.0625]' --theta 0.5
    levysmooth fn norms --function '{"variant": "ciesielski", "alpha": 0.5}' --alpha 0.5
    levysmooth verify --suite AC1 AC2 --no-timestamp

Specs are given inline as JSON or as the path of a ``.json`` file.

Common arguments:
-----------------

- **seed**: Master seed (default: 0).
- **threads**: Worker processes (default: ``LEVYSMOOTH_THREADS`` or 1).
- **out**: Folder of the artefacts (default: current folder).
- **name**: Stem of the artefact files (default: the subcommand).
- **no-timestamp**: Omit the ``# generated`` line of the CSV file.
- **log-level**: Set the logging level (e.g., INFO, DEBUG).

Exit codes are 0 on success, 1 when acceptance checks fail, 2 on invalid
input, 3 when the result is a divergence verdict and 4 when the computation
fails (a quadrature over its error ceiling or a failed worker task).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import TYPE_CHECKING

from levysmooth.experiment import FN_ACTIONS, COUPLES, run_dict

if TYPE_CHECKING:  # pragma: no cover
    from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)

SPEC_ARGUMENTS = {
    "moments": ("measure", "process"),
    "bg-index": ("measure", "process"),
    "sample": ("process",),
    "density": ("process",),
    "d12": ("function", "process", "measure"),
    "psi": ("function", "process"),
    "fit-theta": ("function", "process"),
    "probe": ("process",),
    "kfunc": ("function",),
    "fn": ("function",),
    "verify": (),
}

PARAMETER_ARGUMENTS = {
    "moments": ("xi",),
    "bg-index": ("u_grid",),
    "sample": ("t", "n"),
    "density": ("t", "x"),
    "d12": ("mode", "samples"),
    "psi": ("t_grid", "n"),
    "fit-theta": ("t_grid", "n", "theta", "log_correction"),
    "probe": ("beta_prime", "c", "t0"),
    "kfunc": ("couple", "input", "theta", "q", "t_grid"),
    "fn": ("action", "x", "alpha", "interval", "max_points"),
    "verify": ("suite",),
}


def build_config(args: argparse.Namespace) -> Dict[str, Any]:
    """Turns the parsed arguments of a subcommand into a configuration object."""
    config: Dict[str, Any] = {
        "name": args.name or args.command,
        "operation": args.command,
        "seed": args.seed,
        "output": str(args.out),
        "timestamp": not args.no_timestamp,
    }
    if args.threads is not None:
        config["threads"] = args.threads
    for key in SPEC_ARGUMENTS[args.command]:
        value = getattr(args, key)
        if value is not None:
            config[key] = value

    parameters = {}
    for key in PARAMETER_ARGUMENTS[args.command]:
        value = getattr(args, key)
        if value is not None and value is not False:
            parameters[key] = value
    config["parameters"] = parameters
    return config


def main(args: Optional[argparse.Namespace] = None) -> int:
    """
    Sets up logging, parses command-line arguments (if not provided),
    and runs the configuration built from them.

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

    return run_dict(build_config(args))


def get_args(argv: Optional[list] = None) -> argparse.Namespace:
    """
    Parse command-line arguments and return them as an `argparse.Namespace` object.

    Returns:
        argparse.Namespace: The parsed command-line arguments, with
            ``command`` naming the subcommand.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--log-level",
        default="INFO",
        choices=["CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG", "NOTSET"],
    )
    common.add_argument("--seed", type=int, default=0, help="Master seed.")
    common.add_argument("--threads", type=int, default=None, help="Worker processes.")
    common.add_argument("--out", type=Path, default=Path("."), help="Artefact folder.")
    common.add_argument("--name", default=None, help="Stem of the artefact files.")
    common.add_argument(
        "--no-timestamp",
        action="store_true",
        help="Omit the generation timestamp line of the CSV file.",
    )

    parser = argparse.ArgumentParser(prog="levysmooth")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def subcommand(name: str, help_: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, parents=[common], help=help_)
        for spec in SPEC_ARGUMENTS[name]:
            sub.add_argument(f"--{spec}", default=None, help=f"{spec.capitalize()} spec (JSON).")
        return sub

    sub = subcommand("moments", "Moments m_xi of a Lévy measure.")
    sub.add_argument("--xi", type=float, nargs="+", default=None)

    sub = subcommand("bg-index", "Blumenthal-Getoor index and density criterion.")
    sub.add_argument("--u-grid", type=float, nargs="+", default=None)

    sub = subcommand("sample", "Draws of X_t.")
    sub.add_argument("--t", type=float, default=None)
    sub.add_argument("--n", type=int, default=None)

    sub = subcommand("density", "Density of X_t (law for compound Poisson processes).")
    sub.add_argument("--t", type=float, default=None)
    sub.add_argument("--x", type=float, nargs="+", default=None)

    sub = subcommand("d12", "D_{1,2} norm of f(X_1).")
    sub.add_argument("--mode", choices=["density", "mc"], default=None)
    sub.add_argument("--samples", type=int, default=None)

    for name, help_ in (
        ("psi", "Psi(t) on a grid."),
        ("fit-theta", "Decay exponent of Psi."),
    ):
        sub = subcommand(name, help_)
        sub.add_argument("--t-grid", type=float, nargs="+", default=None)
        sub.add_argument("--n", type=int, default=None)
    sub.add_argument("--theta", type=float, default=None)
    sub.add_argument("--log-correction", action="store_true")

    sub = subcommand("probe", "Small-time exceedance integral.")
    sub.add_argument("--beta-prime", type=float, required=True)
    sub.add_argument("--c", type=float, default=None)
    sub.add_argument("--t0", type=float, default=None)

    sub = subcommand("kfunc", "K-functional and interpolation norm.")
    sub.add_argument("--couple", choices=COUPLES, required=True)
    sub.add_argument("--input", default=None, help="Squared norms c_n (JSON list or file).")
    sub.add_argument("--theta", type=float, required=True)
    sub.add_argument("--q", type=float, default=None)
    sub.add_argument("--t-grid", type=float, nargs="+", default=None)

    sub = subcommand("fn", "Catalogue function evaluation, norms and displacement energy.")
    sub.add_argument("action", choices=FN_ACTIONS)
    sub.add_argument("--x", type=float, nargs="+", default=None)
    sub.add_argument("--alpha", type=float, default=None)
    sub.add_argument("--interval", type=float, nargs=2, default=None)
    sub.add_argument("--max-points", type=int, default=None)

    sub = subcommand("verify", "Acceptance suite.")
    sub.add_argument("--suite", nargs="*", default=None)

    return parser.parse_args(argv)


if __name__ == "__main__":
    sys.exit(main())
