import argparse
import sys
import warnings
from typing import List, Optional

from Common.constants import ASSUMPTION1_DEFAULT_REPS, MAX_WORKERS
from Controllers.ExperimentController import cmd_check, cmd_diagnose, cmd_pareto, cmd_plot, cmd_run
from Logging_file.logging_file import custom_logger

warnings.filterwarnings("ignore")


def _add_common(parser: argparse.ArgumentParser, seeds: bool = True) -> None:
    parser.add_argument("spec", help="experiment spec (JSON)")
    if seeds:
        parser.add_argument("--seed-override", type=int, default=None, help="run this single seed instead of the spec's list")
    parser.add_argument("--workers", type=int, default=MAX_WORKERS, help="worker pool size")
    parser.add_argument("--out-dir", default=None, help="output directory (default: spec output_dir or $FAIRAPPROACH_OUTPUT_DIR)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairapproach",
                                     description="Approachability-based fair online learning simulator")
    commands = parser.add_subparsers(dest="command", required=True)

    _add_common(commands.add_parser("run", help="simulate every seed and write trajectories plus summary.json"))
    _add_common(commands.add_parser("pareto", help="sweep tau and write the tradeoff frontier"))
    _add_common(commands.add_parser("check", help="brute-force the dual condition at two grid resolutions"), seeds=False)

    plot = commands.add_parser("plot", help="log-x chart of trajectory CSV columns")
    plot.add_argument("csv", nargs="+", help="trajectory CSV files")
    plot.add_argument("--out", required=True, help="output SVG path")
    plot.add_argument("--columns", default=None, help="comma-separated column names, e.g. d_t,C_t")

    diagnose = commands.add_parser("diagnose", help="estimation diagnostics for the spec's context distribution")
    _add_common(diagnose, seeds=False)
    diagnose.add_argument("--reps", type=int, default=ASSUMPTION1_DEFAULT_REPS, help="replications per grid point")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    custom_logger.info(f"Command: {args.command}")

    if args.command == "run":
        return cmd_run(args.spec, args.seed_override, args.workers, args.out_dir)
    if args.command == "pareto":
        return cmd_pareto(args.spec, args.seed_override, args.workers, args.out_dir)
    if args.command == "check":
        return cmd_check(args.spec, args.workers, args.out_dir)
    if args.command == "plot":
        columns = [name.strip() for name in args.columns.split(",") if name.strip()] if args.columns else None
        return cmd_plot(args.csv, args.out, columns)
    return cmd_diagnose(args.spec, args.reps, args.workers, args.out_dir)


if __name__ == "__main__":
    sys.exit(main())
