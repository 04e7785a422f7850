"""Command-line entry point: ``phaseless-rtm <mode> --config FILE [overrides]``."""

from __future__ import annotations

import argparse
import sys

from .config import load_config
from .errors import ConfigError, DatasetFormatError, RTMError
from .experiments import MODES, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def build_parser():
    parser = argparse.ArgumentParser(
        prog="phaseless-rtm",
        description="Synthesize scattering data and image obstacles from phaseless measurements.",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode)
        p.add_argument("--config", required=True, help="JSON experiment file")
        p.add_argument("--k", type=float, help="override the wavenumber (single frequency)")
        p.add_argument("--mu", type=float, help="override the noise level")
        p.add_argument("--seed", type=int, help="override the noise seed")
        p.add_argument("--out-dir", help="directory for all outputs")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config).with_overrides(args.k, args.mu, args.seed, args.out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        run_experiment(cfg, args.mode)
    except (ConfigError, DatasetFormatError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RTMError, ArithmeticError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
