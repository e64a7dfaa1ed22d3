"""render --run DIR [DIR ...] --figs 5,6,7 --format svg|png [--out DIR]"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from .data import SchemaError
from .render import FIGURE_IDS, render


def build_parser():
    p = argparse.ArgumentParser(prog="z2plots", description=__doc__)
    p.add_argument("--run", nargs="+", required=True, help="run directories (sweep/sector outputs)")
    p.add_argument("--figs", default=",".join(str(i) for i in FIGURE_IDS), help="comma-separated figure ids")
    p.add_argument("--format", choices=["svg", "png"], default="svg")
    p.add_argument("--out", default=None, help="output directory (default: first run dir)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        fig_ids = [int(tok) for tok in args.figs.split(",") if tok.strip()]
    except ValueError:
        print(f"bad --figs list: {args.figs!r}", file=sys.stderr)
        return 2
    out_dir = Path(args.out) if args.out else Path(args.run[0]) / "figures"
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            outputs = render(args.run, fig_ids, out_dir, args.format)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    for fid, path in sorted(outputs.items()):
        print(f"fig {fid}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
