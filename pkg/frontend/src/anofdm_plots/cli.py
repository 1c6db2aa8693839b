"""plot_figures: render a figure analogue from the CLI's CSV artifacts.

Usage: plot_figures <results.csv> <metadata.json> --which figN --out dir/

Exits nonzero without writing images when the CSV violates the schema, is
empty, or does not belong to the requested figure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import FigureJob, render
from .schema import FIGURES, SchemaMismatchError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plot_figures", description=__doc__)
    parser.add_argument("results_csv", type=Path)
    parser.add_argument("metadata_json", type=Path)
    parser.add_argument("--which", required=True, choices=FIGURES)
    parser.add_argument("--out", type=Path, default=Path("figures"))
    args = parser.parse_args(argv)

    job = FigureJob(
        csv_path=args.results_csv,
        metadata_path=args.metadata_json,
        figure_id=args.which,
        output_dir=args.out,
    )
    try:
        written = render(job)
    except (SchemaMismatchError, FileNotFoundError, ValueError) as exc:
        print(f"plot_figures: error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
