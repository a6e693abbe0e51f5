"""Command-line entry point: render figures from a run directory."""

from __future__ import annotations

import argparse
import sys

from .io import SchemaError
from .render import KINDS, FigureSpec, render


def build_parser():
    parser = argparse.ArgumentParser(
        prog="render_figs",
        description="Render static figures from a pipeline run directory.",
    )
    parser.add_argument("--run-dir", required=True,
                        help="completed run directory with CSV/JSON outputs")
    parser.add_argument("--out", required=True,
                        help="directory for the rendered images")
    parser.add_argument("--kinds", nargs="+", choices=KINDS,
                        default=list(KINDS),
                        help="figure kinds to render (default: all)")
    parser.add_argument("--point-size", type=float, default=2.0)
    parser.add_argument("--colormap", default="viridis")
    parser.add_argument("--k", type=int, default=None,
                        help="restrict criterion-scatter to one product index")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    options = {} if args.k is None else {"k": args.k}
    try:
        for kind in args.kinds:
            spec = FigureSpec(kind, args.run_dir, args.out,
                              point_size=args.point_size,
                              colormap=args.colormap, options=options)
            for path in render(spec):
                print(path)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
