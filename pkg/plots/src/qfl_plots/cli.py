"""``plots`` command: render figures from one or more metrics.csv files."""

from __future__ import annotations

import argparse
import sys

from .metrics_io import MetricsSchemaError
from .render import FORMATS, FigureRequest, render


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots",
        description="Render accuracy and training-loss figures from "
                    "qflsim metrics.csv files",
    )
    parser.add_argument("--metrics", nargs="+", required=True,
                        help="one or more metrics.csv files")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--format", choices=FORMATS, default="png")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        written = render(FigureRequest(args.metrics, args.out, args.format))
    except (MetricsSchemaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
