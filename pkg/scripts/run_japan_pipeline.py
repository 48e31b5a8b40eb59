#!/usr/bin/env python3
"""Full reproduction run on user-supplied Japan CSVs.

Expects the two canonical files described in the README (hand-converted
from the central-bank monetary base workbook and the official CPI
export):

    python3 scripts/run_japan_pipeline.py \
        --monetary data/japan_monetary.csv --cpi data/japan_cpi.csv \
        [--out out_japan] [--robustness]
"""

import argparse
import sys
import time

from monephase.cli import main as cli


def run(args):
    t0 = time.time()
    base = [
        "--monetary", args.monetary,
        "--cpi", args.cpi,
        "--out", args.out,
    ]
    irf = ["irf"] + base + (["--robustness"] if args.robustness else [])
    steps = [
        ["transform"] + base,
        ["breakpoints"] + base,
        ["fit-phase"] + base,
        irf,
        ["calibrate"] + base,
        ["landau"] + base,
        ["efficiency"] + base,
        ["report"] + base,
    ]
    for step in steps:
        print(f"== monephase {' '.join(step)}")
        rc = cli(step)
        if rc != 0:
            print(f"command failed with exit code {rc}", file=sys.stderr)
            return rc
    print(f"\nfinished in {time.time() - t0:.1f}s; see {args.out}/report.txt")
    return 0


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--monetary", required=True)
    parser.add_argument("--cpi", required=True)
    parser.add_argument("--out", default="out_japan")
    parser.add_argument("--robustness", action="store_true")
    sys.exit(run(parser.parse_args()))
