"""Command-line entry point.

Subcommands map one-to-one onto the experiments; every run writes an
RFC-4180 CSV (atomically) plus a rendered PNG figure with the same stem.
Runs are deterministic in (config, seed), independent of the worker count.
"""

from __future__ import annotations

import argparse
import os
import sys

from .. import __version__
from .config import load_config
from .csvio import read_rows, write_csv
from .experiments import run_experiment
from .plots import render_figure

_SUBCOMMANDS = {
    "beam-pattern": "beam_pattern",
    "fig2": "fig2",
    "fig3": "fig3",
    "qpsk-sweep": "qpsk_sweep",
    "lemma-check": "lemma_check",
    "theorem-sweep": "theorem_sweep",
}

_HELP = {
    "beam-pattern": "sample beamforming patterns over the angle grid",
    "fig2": "full-CSI water-filled capacity, full vs truncated gains",
    "fig3": "CSIR capacity with preset covariances across spacings",
    "qpsk-sweep": "QPSK SIC lower bound against the Gaussian rate",
    "lemma-check": "kernel-sum bound scans; nonzero exit on violation",
    "theorem-sweep": "normalized capacity gaps across system sizes",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mimo-dense",
        description="Capacity and QPSK-rate experiments for densely spaced uniform linear arrays",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, experiment in _SUBCOMMANDS.items():
        p = sub.add_parser(name, help=_HELP[name])
        p.set_defaults(experiment=experiment)
        p.add_argument("--config", metavar="PATH", help="TOML config file")
        p.add_argument("--seed", type=int, metavar="U64", help="master seed")
        p.add_argument("--out", metavar="PATH", help="output CSV path")
        p.add_argument("--trials", type=int, metavar="N", help="Monte Carlo trials")
        p.add_argument(
            "--threads", type=int, metavar="N",
            help="worker processes (falls back to MIMO_DENSE_THREADS, then 1)",
        )
        p.add_argument("--no-figure", action="store_true", help="skip the PNG figure")
    return parser


def _thread_count(args: argparse.Namespace) -> int | None:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("MIMO_DENSE_THREADS")
    return int(env) if env else None


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(
            args.experiment,
            toml_path=args.config,
            master_seed=args.seed,
            output_path=args.out,
            trials=args.trials,
            threads=_thread_count(args),
        )
    except (ValueError, OSError) as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return 2

    try:
        result = run_experiment(config)
        write_csv(
            config.output_path, result.header, result.rows,
            config.content_hash(), __version__,
        )
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    outputs = [config.output_path]
    if not args.no_figure:
        figure_path = os.path.splitext(config.output_path)[0] + ".png"
        _, rows = read_rows(config.output_path)
        render_figure(config, rows, figure_path)
        outputs.append(figure_path)

    status = "ok" if result.passed else "FAIL"
    print(f"{config.experiment}: {result.summary} [{status}] -> {', '.join(outputs)}")
    return 0 if result.passed else 3


if __name__ == "__main__":
    sys.exit(main())
