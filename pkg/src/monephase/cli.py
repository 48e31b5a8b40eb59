"""Command-line entry point.

    monephase <command> --config <path> [--out DIR] [--set key=value ...]

Commands: transform, breakpoints, fit-phase, irf, calibrate, landau,
efficiency, synth, report. Exit codes: 0 success, 1 validation error,
2 numerical non-convergence (partial outputs are left in place).
"""

from __future__ import annotations

import argparse
import sys

from .config import RunConfig, apply_overrides, parse_config
from .errors import ConvergenceError, MonephaseError
from .pipeline import (
    cmd_breakpoints,
    cmd_calibrate,
    cmd_efficiency,
    cmd_fit_phase,
    cmd_irf,
    cmd_landau,
    cmd_report,
    cmd_synth,
    cmd_transform,
)

COMMANDS = {
    "transform": cmd_transform,
    "breakpoints": cmd_breakpoints,
    "fit-phase": cmd_fit_phase,
    "irf": cmd_irf,
    "calibrate": cmd_calibrate,
    "landau": cmd_landau,
    "efficiency": cmd_efficiency,
    "synth": cmd_synth,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="monephase",
        description="Monetary order-parameter pipeline (batch CSV in, CSV out).",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--monetary", help="override data.monetary")
    parser.add_argument("--cpi", help="override data.cpi")
    parser.add_argument("--out", help="override out.dir")
    parser.add_argument("--seed", type=int, help="override seed")
    parser.add_argument(
        "--robustness", action="store_true", help="run the irf robustness sweep"
    )
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override any config key (repeatable)",
    )
    return parser


def load_config(args) -> RunConfig:
    cfg = parse_config(args.config) if args.config else RunConfig()
    overrides = list(args.overrides)
    if args.monetary:
        overrides.append(f"data.monetary={args.monetary}")
    if args.cpi:
        overrides.append(f"data.cpi={args.cpi}")
    if args.out:
        overrides.append(f"out.dir={args.out}")
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.robustness:
        overrides.append("irf.robustness=true")
    return apply_overrides(cfg, overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        written = COMMANDS[args.command](cfg)
    except ConvergenceError as exc:
        print(f"monephase: non-convergence: {exc}", file=sys.stderr)
        return 2
    except MonephaseError as exc:
        print(f"monephase: error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
