"""``qsbm-plot <figure_kind> --in DIR [--in DIR2] --out FILE.png``"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import FIGURE_KINDS, FigureSpec, render
from .io import SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsbm-plot",
        description="Render paper-style figures from qsbm run directories")
    parser.add_argument("figure_kind", choices=FIGURE_KINDS)
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        metavar="DIR", help="run directory (repeatable, e.g. fig7)")
    parser.add_argument("--out", required=True, metavar="FILE.png")
    parser.add_argument("--metric", choices=("empirical", "exact"),
                        default="empirical",
                        help="which converged KLD to plot (default: empirical)")
    parser.add_argument("--point", default=None,
                        help="fig5: sweep-point key to plot (default: first)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(kind=args.figure_kind,
                      input_dirs=tuple(Path(p) for p in args.inputs),
                      output_path=Path(args.out),
                      metric=args.metric,
                      point_key=args.point)
    try:
        out = render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out} and {out.with_suffix(out.suffix + '.data.csv')}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
