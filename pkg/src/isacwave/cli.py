"""Command-line entry point.

``isac run <spec.cfg> --out <dir>`` executes the experiment described by a
spec file; ``isac demo fig2|fig3|fig4a|fig4b`` writes the matching default
spec into the output directory and runs it. Exit codes: 0 on success, 2 on a
spec problem, 3 when the solver aborts numerically. The ``ISAC_THREADS``
environment variable overrides ``--threads``.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from .exceptions import ConfigError, SolverAbort
from .experiments import (
    default_spec,
    parse_config,
    run_experiment,
    write_config,
)

FIGURE_KINDS = {
    "fig2": "papr-convergence",
    "fig3": "sumrate-vs-snr",
    "fig4a": "beampattern",
    "fig4b": "mse-vs-rho",
}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None,
                        help="override the spec's base seed")
    parser.add_argument("--trials", type=int, default=None,
                        help="override the spec's trial count")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker processes for the trial loop")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isac",
        description="Joint communication/sensing waveform experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment spec file")
    run_p.add_argument("spec", help="path to a key=value spec file")
    run_p.add_argument("--out", required=True, help="output directory")
    _add_common(run_p)

    demo_p = sub.add_parser("demo", help="write a default spec and run it")
    demo_p.add_argument("figure", choices=sorted(FIGURE_KINDS))
    demo_p.add_argument("--out", default="results", help="output directory")
    _add_common(demo_p)
    return parser


def _resolve_threads(cli_value: int) -> int:
    raw = os.environ.get("ISAC_THREADS")
    if raw is not None:
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(f"ISAC_THREADS must be an integer, got {raw!r}")
    else:
        value = cli_value
    if value < 1:
        raise ConfigError(f"thread count must be >= 1, got {value}")
    return value


def _apply_overrides(spec, args):
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    if args.trials is not None:
        spec = replace(spec, n_trials=args.trials)
    return spec


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        threads = _resolve_threads(args.threads)
        out_dir = Path(args.out)
        if args.command == "run":
            path = Path(args.spec)
            try:
                text = path.read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read spec file {path}: {exc}") from exc
            spec = _apply_overrides(parse_config(text), args)
        else:
            spec = _apply_overrides(default_spec(FIGURE_KINDS[args.figure]), args)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "demo":
            cfg_path = out_dir / f"{args.figure}.cfg"
            cfg_path.write_text(write_config(spec))
            print(f"wrote {cfg_path}")
        result = run_experiment(spec, out_dir, threads=threads)
    except ConfigError as exc:
        print(f"isac: spec error: {exc}", file=sys.stderr)
        return 2
    except SolverAbort as exc:
        print(f"isac: solver abort: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {result.csv_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
