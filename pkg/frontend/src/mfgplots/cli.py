"""Command line: render figures from one run directory."""

from __future__ import annotations

import argparse
import sys

from .render import FIGURE_KINDS, render
from .runview import RunViewError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mfgplots", description="Static figures from run directories")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render figures for one run directory")
    p.add_argument("run_dir", help="directory containing manifest.json")
    p.add_argument("--figs", default=",".join(FIGURE_KINDS),
                   help="comma-separated figure kinds "
                        f"(default: {','.join(FIGURE_KINDS)})")
    p.add_argument("--out", default="figures", help="output directory")
    args = parser.parse_args(argv)

    figs = [f.strip() for f in args.figs.split(",") if f.strip()]
    try:
        written = render(args.run_dir, figs, args.out)
    except (RunViewError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
