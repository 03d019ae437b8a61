#!/usr/bin/env python3
"""Regenerate the CSV data behind all reference figures.

Usage:
    python scripts/make_figure_data.py [--out-dir figures] [--format csv]
"""

import argparse
import pathlib

from quadherald.sweeps import FIGURE_IDS, FigureJob, build_figure, \
    format_csv, format_json


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", default="figures")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    args = ap.parse_args()

    out_dir = pathlib.Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    formatter = format_json if args.format == "json" else format_csv

    for fig in FIGURE_IDS:
        meta, columns, rows = build_figure(FigureJob(figure_id=fig))
        path = out_dir / f"{fig}.{args.format}"
        path.write_text(formatter(meta, columns, rows), encoding="utf-8")
        print(f"wrote {path} ({len(rows)} rows)")


if __name__ == "__main__":
    main()
