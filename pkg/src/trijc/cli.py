"""Command line interface.

Subcommands::

    trijc sweep --config PATH [--out PATH]
    trijc fig2      [--out PATH] [overrides]
    trijc fig3      [--out PATH] [overrides]
    trijc classical [--out PATH] [overrides]
    trijc qcorr     [--out PATH] [overrides]

Overrides: --alpha --gamma --beta --kappa --gt-steps --gt-end --fock-dim.
``--out -`` (the default) writes CSV to standard output; ``--plot-script``
additionally writes a standalone matplotlib script next to the CSV.

Exit codes: 0 success, 1 validation/config error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .dynamics import TruncationError
from .lab import (
    PRESETS,
    ConfigError,
    SweepError,
    emit_csv,
    emit_plot_script,
    parse_config,
    run_sweep,
)
from .sdp import SdpConvergenceError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2

_NUMERICAL_ERRORS = (SdpConvergenceError, TruncationError, np.linalg.LinAlgError, FloatingPointError)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default="-", help="CSV destination path, or - for stdout")
    parser.add_argument(
        "--plot-script",
        default=None,
        metavar="PATH",
        help="also write a matplotlib script plotting the CSV (requires a file --out)",
    )


def _add_overrides(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=None)
    parser.add_argument("--gamma", type=float, default=None)
    parser.add_argument("--beta", type=float, default=None)
    parser.add_argument("--kappa", type=float, default=None)
    parser.add_argument("--gt-steps", type=int, default=None, dest="gt_steps")
    parser.add_argument("--gt-end", type=float, default=None, dest="gt_end")
    parser.add_argument("--fock-dim", type=int, default=None, dest="fock_dim")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trijc",
        description="Triple Jaynes-Cummings sweeps and entanglement detection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run a sweep from a config file")
    p_sweep.add_argument("--config", required=True, help="path to a key = value config file")
    _add_common(p_sweep)

    for name, builder in PRESETS.items():
        p = sub.add_parser(name, help=(builder.__doc__ or "").strip().splitlines()[0])
        _add_common(p)
        _add_overrides(p)
    return parser


def _spec_from_args(args: argparse.Namespace):
    if args.command == "sweep":
        with open(args.config, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    builder = PRESETS[args.command]
    return builder(
        alpha=args.alpha,
        gamma=args.gamma,
        beta=args.beta,
        kappa=args.kappa,
        fock_dim=args.fock_dim,
        gt_steps=args.gt_steps,
        gt_end=args.gt_end,
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.plot_script is not None and args.out == "-":
            raise ConfigError("--plot-script requires --out to be a file path")
        spec = _spec_from_args(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    try:
        result = run_sweep(spec)
        emit_csv(result, args.out)
        if args.plot_script is not None:
            emit_plot_script(result, args.out, args.plot_script)
    except SweepError as exc:
        cause = exc.__cause__
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(cause, _NUMERICAL_ERRORS):
            return EXIT_NUMERICAL
        return EXIT_VALIDATION
    except _NUMERICAL_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
