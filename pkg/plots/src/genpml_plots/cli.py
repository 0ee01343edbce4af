"""Command-line interface: one invocation renders one figure.

Exit codes: 0 success; 1 usage (bad flags or an invalid figure spec);
2 runtime failure (unreadable input, schema mismatch, render failure).
"""

from __future__ import annotations

import argparse
import sys

from .exceptions import FigureSpecError, PlotsError
from .figures import FIGURE_KINDS, IMAGE_FORMATS, STATISTIC_COLUMNS, FigureSpec, render


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1; argparse's default of 2 is reserved for runtime
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    p = _Parser(prog="genpml-plots",
                description="Render figures from genpml experiment outputs")
    p.add_argument("--kind", choices=FIGURE_KINDS, required=True)
    p.add_argument("--input", action="append", required=True, dest="inputs",
                   metavar="PATH",
                   help="input file; histogram_overlay takes it twice "
                        "(dataset CSV, then fit JSON)")
    p.add_argument("--out", required=True,
                   help="output image path (.svg or .png)")
    p.add_argument("--format", choices=IMAGE_FORMATS, default=None,
                   help="image format (default: from the --out suffix)")
    p.add_argument("--title", default="")
    p.add_argument("--xlabel", default="")
    p.add_argument("--ylabel", default="")
    p.add_argument("--legend-title", default="")
    p.add_argument("--value", choices=STATISTIC_COLUMNS, default="rmse",
                   help="statistic a sweep panel plots (default: %(default)s)")
    p.add_argument("--coord", type=int, default=0,
                   help="coordinate a heatmap shows (default: %(default)s)")
    p.add_argument("--outcome", default="y",
                   help="outcome column name (default: %(default)s)")
    p.add_argument("--alpha", type=float, default=1.0,
                   help="variance power of the predictive draw "
                        "(default: %(default)s)")
    p.add_argument("--seed", type=int, default=0,
                   help="seed of the predictive draw (default: %(default)s)")
    p.add_argument("--bins", type=int, default=40,
                   help="histogram bin count (default: %(default)s)")
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        spec = FigureSpec(
            kind=args.kind, inputs=tuple(args.inputs), out=args.out,
            format=args.format, title=args.title, xlabel=args.xlabel,
            ylabel=args.ylabel, legend_title=args.legend_title,
            value=args.value, coord=args.coord, outcome=args.outcome,
            alpha=args.alpha, seed=args.seed, bins=args.bins,
        )
    except FigureSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        path = render(spec)
    except (PlotsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
