"""Command line entry point: ``simulate {run,validate,figures}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .figures import FIGURES, figure_spec
from .runner import run_experiment
from .spec import SpecError, load_spec


def _summary(result) -> str:
    lines = [f"{len(result.rows)} row(s), {len(result.errors)} error(s)"]
    for row in result.rows:
        extra = f" ser={row['ser']:.3g}" if row["ser"] == row["ser"] else ""
        lines.append(f"  N={row['N']:5d} M={row['M']:5d} K={row['K']:3d} {row['dac_mode']:15s} "
                     f"{row['orientation']} eps~={row['eps_tilde']:.5f} eps_mc={row['eps_mc']:.5f}{extra}")
    lines.extend(f"  error: {e}" for e in result.errors)
    return "\n".join(lines)


def cmd_run(args) -> int:
    spec = load_spec(args.spec)
    if args.output:
        spec.output_path = args.output
    result = run_experiment(spec, workers=args.workers)
    print(_summary(result))
    if spec.output_path:
        print(f"wrote {spec.output_path}")
    return 0 if result.rows else 1


def cmd_validate(args) -> int:
    spec = load_spec(args.spec)
    problems = spec.validate()
    points = spec.grid()
    print(f"{args.spec}: {spec.kind}, {len(points)} grid point(s), {spec.realizations} realization(s)")
    for msg in problems:
        print(f"  {msg}")
    if problems:
        return 1
    print("  ok")
    return 0


def cmd_figures(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for number in args.figure:
        path = out / f"figure{number}-{args.scale}.csv"
        spec = figure_spec(number, args.scale, seed=args.seed, output_path=str(path))
        print(f"figure {number}: {FIGURES[number]}")
        result = run_experiment(spec, workers=args.workers)
        print(_summary(result))
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simulate", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the sweep described by a JSON spec")
    p.add_argument("spec")
    p.add_argument("-o", "--output", help="override output-path")
    p.add_argument("-j", "--workers", type=int, help="worker threads (default: SIM_THREADS or CPU count)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="check a JSON spec without running it")
    p.add_argument("spec")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("figures", help="regenerate the data for figures 1-4")
    p.add_argument("figure", type=int, nargs="+", choices=sorted(FIGURES))
    p.add_argument("--scale", choices=["reduced", "full"], default="reduced")
    p.add_argument("--out", default="figures")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("-j", "--workers", type=int)
    p.set_defaults(func=cmd_figures)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (SpecError, OSError) as exc:
        print(f"simulate: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
