"""figkit --in <dir> --fig <kind> --out <path>"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .io import InputDataError
from .render import FIGURE_KINDS, FigureSpec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="figkit",
        description="Render figures from a cityeq scenario output directory.",
    )
    parser.add_argument("--in", dest="input_dir", required=True,
                        help="scenario output directory (wages.csv, fields_*.csv)")
    parser.add_argument("--fig", dest="kind", required=True, choices=FIGURE_KINDS)
    parser.add_argument("--out", dest="output", required=True,
                        help="output image path (png/pdf/svg)")
    args = parser.parse_args(argv)
    try:
        info = render(
            FigureSpec(Path(args.input_dir), args.kind, Path(args.output))
        )
    except InputDataError as exc:
        print(f"figkit error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {info.output_path} ({info.kind}, {info.panel_count} panel(s))")
    return 0


if __name__ == "__main__":
    sys.exit(main())
