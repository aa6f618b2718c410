"""Command-line harness: ``qsbm run|summarize|validate``.

Exit codes: 0 success, 2 invalid config, 3 refusing to overwrite partial
output (use --resume), 1 anything else.
"""

from __future__ import annotations

import argparse
import sys

from .experiments import ConfigError, expand_points, load_config, run, summarize


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsbm",
        description="Quantum scrambling Born machine experiment harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config", help="path to a JSON experiment config")
    p_run.add_argument("--out", help="output directory (overrides config output_dir)")
    p_run.add_argument("--workers", type=int, default=None,
                       help="parallel worker processes (default: config or 1)")
    p_run.add_argument("--resume", action="store_true",
                       help="fill in missing (point, seed) pairs of a partial run")
    p_run.add_argument("--dry-run", action="store_true",
                       help="print the resolved sweep table and exit")

    p_sum = sub.add_parser("summarize", help="rebuild summary.csv from results.csv")
    p_sum.add_argument("results_dir", help="directory containing results.csv")

    p_val = sub.add_parser("validate", help="check a config and print its sweep table")
    p_val.add_argument("config", help="path to a JSON experiment config")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            run(args.config, out_dir=args.out, workers=args.workers,
                resume=args.resume, dry_run=args.dry_run)
        elif args.command == "summarize":
            summarize(args.results_dir)
        else:
            config = load_config(args.config)
            points = expand_points(config)
            print(f"OK: {config['experiment']} with {len(points)} sweep points x "
                  f"{config['train']['num_realizations']} realizations "
                  f"(root_seed {config['root_seed']})")
            for p in points:
                print(f"  [{p.index:3d}] {p.key}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3 if "already exists" in str(exc) else 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
