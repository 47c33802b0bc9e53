"""Command-line figure renderer for nlisim result tables.

Single-threaded batch tool: reads one or more persisted tables and writes
one figure file.  The figure kind defaults to the table's own command
metadata and can be overridden with --kind.
"""

from __future__ import annotations

import argparse
import sys

from .figures import COMMAND_KINDS, FigureSpec, KINDS, render
from .io import read_table


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figgen",
        description="Render publication-style figures from nlisim CSV/JSON tables.",
    )
    parser.add_argument("inputs", nargs="+", help="input table files (.csv or .json)")
    parser.add_argument("-o", "--output", required=True, help="output figure file (.png or .svg)")
    parser.add_argument("-k", "--kind", choices=sorted(KINDS), default=None,
                        help="figure kind (default: inferred from the first table)")
    parser.add_argument("--title", default=None)
    parser.add_argument("--log-x", action="store_true", default=None)
    parser.add_argument("--log-y", action="store_true", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        kind = args.kind
        if kind is None:
            command = read_table(args.inputs[0]).command
            kind = COMMAND_KINDS.get(command)
            if kind is None:
                raise ValueError(f"cannot infer a figure kind from command {command!r}; use --kind")
        spec = FigureSpec(
            figure_kind=kind,
            input_paths=args.inputs,
            output_path=args.output,
            title=args.title,
            log_x=args.log_x,
            log_y=args.log_y,
        )
        render(spec)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
