"""Command line: ``figures <kind> --in results.csv --out fig.svg``."""

from __future__ import annotations

import argparse
import sys

from .data import SchemaError
from .render import KINDS, FigureSpec, render


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render study figures from seqdetect result CSVs.",
    )
    parser.add_argument("kind", choices=KINDS, help="which figure to draw")
    parser.add_argument("--in", dest="input_csv", required=True, help="study results CSV")
    parser.add_argument("--out", dest="output_path", required=True,
                        help="output image (.svg default, .png supported)")
    parser.add_argument("--a", type=float, default=None,
                        help="detection threshold for the log(a) reference line "
                             "(default: read from the sibling manifest)")
    parser.add_argument("--manifest", default=None,
                        help="manifest JSON to read the threshold from")
    args = parser.parse_args(argv)
    try:
        out = render(FigureSpec(
            kind=args.kind,
            input_csv=args.input_csv,
            output_path=args.output_path,
            a=args.a,
            manifest=args.manifest,
        ))
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
