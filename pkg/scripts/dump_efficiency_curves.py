#!/usr/bin/env python3
"""Dump the part-load efficiency curve of each converter kind as plot-ready CSV.

Usage: python scripts/dump_efficiency_curves.py [--points 200] [--out curves.csv]
"""

import argparse
import csv

import numpy as np

from nanogrid import ConverterSpec, efficiency_at
from nanogrid.converters import DEFAULT_PEAK_EFFICIENCIES


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=200)
    parser.add_argument("--out", default="curves.csv")
    args = parser.parse_args()

    loads = np.linspace(0.005, 1.0, args.points)
    specs = {
        kind: ConverterSpec(kind, peak, rated_power_kw=1.0)
        for kind, peak in DEFAULT_PEAK_EFFICIENCIES.items()
    }
    with open(args.out, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["load_fraction"] + list(specs))
        for l in loads:
            writer.writerow(
                [f"{l:.6f}"]
                + [f"{efficiency_at(spec, float(l)):.6f}" for spec in specs.values()]
            )
    print(f"wrote {args.points} samples x {len(specs)} converters to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
