"""Command-line wrapper: one CSV in, one image out, nonzero exit on bad input."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import PlotSpec, render
from .schema import KINDS, SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot_fig.py",
        description="Render an experiment CSV to an image.",
    )
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="csv_path", required=True,
                        help="input CSV from the experiment CLI")
    parser.add_argument("--out", dest="out_path", required=True,
                        help="output image path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(kind=args.kind, csv_path=Path(args.csv_path),
                    out_path=Path(args.out_path))
    try:
        info = render(spec)
    except SchemaError as exc:
        print(f"plot_fig: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {spec.out_path} ({info.traces} traces, "
          f"{info.thresholds} threshold lines)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
