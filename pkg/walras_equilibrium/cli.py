#!/usr/bin/env python3
"""
Command-line interface for walras-equilibrium.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Union

from .config import get_log_level, load_configuration
from .economy_io import EconomyFileError, export_fixtures, list_fixtures, load_fixture, parse_economy
from .models import Economy, ModelError
from .reports import build_summary, format_prices, write_summary, write_trajectory
from .solver import SolveStatus, floor_prices, multistart_solve, solve
from .validation import check_recourse
from .walrasian import AugmentingKind, evaluate_market

EXIT_CONVERGED = 0
EXIT_ERROR = 1
EXIT_MAX_ITER = 2

AUGMENTING_CHOICES = {"self-dual": AugmentingKind.SELF_DUAL, "linf": AugmentingKind.LINF_BALL}


def create_parser() -> argparse.ArgumentParser:
    """Create the argument parser for the CLI."""
    parser = argparse.ArgumentParser(
        prog="walras-equilibrium",
        description="Walras equilibrium prices by augmented Walrasian iteration"
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Log every iteration detail")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Log warnings and errors only")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # Solve command
    solve_parser = subparsers.add_parser("solve", help="Compute equilibrium prices")
    solve_parser.add_argument("economy", help="Economy file, or the name of a shipped fixture")
    solve_parser.add_argument("--epsilon", type=float, help="Residual tolerance (default: 1e-6)")
    solve_parser.add_argument("--r0", type=float, help="Initial augmenting parameter (default: 1)")
    solve_parser.add_argument("--r-growth", type=float, help="Growth factor of r per iteration (default: 1.259)")
    solve_parser.add_argument("--max-iters", type=int, help="Outer iteration limit (default: 500)")
    solve_parser.add_argument("--delta", type=float, help="Price floor (default: 1e-6)")
    solve_parser.add_argument("--multistart", type=int, help="Number of starts (default: 1)")
    solve_parser.add_argument("--workers", type=int, help="Threads for multi-start runs (default: 1)")
    solve_parser.add_argument("--seed", type=int, help="Random seed (default: 0)")
    solve_parser.add_argument("--ph-rho", type=float, help="Progressive Hedging proximal parameter (default: 1)")
    solve_parser.add_argument("--ph-tol", type=float, help="Progressive Hedging tolerance (default: 1e-6)")
    solve_parser.add_argument("--ph-max-iter", type=int, help="Progressive Hedging iteration limit (default: 500)")
    solve_parser.add_argument(
        "--ph-parallel", action="store_true", default=None,
        help="Solve scenario subproblems on a thread pool"
    )
    solve_parser.add_argument(
        "--augmenting",
        choices=sorted(AUGMENTING_CHOICES),
        help="Augmenting function (default: self-dual)"
    )
    solve_parser.add_argument("--trajectory", type=Path, help="Write the iteration trajectory CSV here")
    solve_parser.add_argument("--summary", type=Path, help="Write the summary JSON here")
    solve_parser.add_argument(
        "--start",
        default="centroid",
        help="Start prices: centroid, random, or comma-separated stage-0 prices (default: centroid)"
    )

    # Validate command
    validate_parser = subparsers.add_parser("validate", help="Check an economy file")
    validate_parser.add_argument("economy", help="Economy file, or the name of a shipped fixture")

    # Recourse command
    recourse_parser = subparsers.add_parser("recourse", help="Run the recourse check of a two-stage economy")
    recourse_parser.add_argument("economy", help="Economy file, or the name of a shipped fixture")

    # Fixtures command
    fixtures_parser = subparsers.add_parser("fixtures", help="List or export the shipped economies")
    fixtures_parser.add_argument("--export", type=Path, metavar="DIR", help="Copy the fixtures into DIR")

    return parser


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    """Set the root handler; ``WALRAS_LOG_LEVEL`` applies when no flag is given."""
    if verbose:
        level = logging.DEBUG
    elif quiet:
        level = logging.WARNING
    else:
        level = get_log_level()
    logging.basicConfig(level=level, format='%(asctime)s - %(levelname)s - %(message)s')


def load_economy(source: str) -> Economy:
    """Parse a file path, falling back to a shipped fixture of that name."""
    path = Path(source)
    if not path.exists() and source in list_fixtures():
        return load_fixture(source)
    return parse_economy(path)


def parse_start(value: str) -> Union[str, List[float]]:
    """
    Interpret the ``--start`` option.

    Raises:
        ValueError: If the value is neither a keyword nor a list of numbers.
    """
    if value in ("centroid", "random"):
        return value
    try:
        return [float(part) for part in value.split(",")]
    except ValueError:
        raise ValueError(f"--start expects centroid, random or comma-separated prices, got {value!r}")


def run_solve(args: argparse.Namespace) -> int:
    """Solve one economy and write the requested reports."""
    logger = logging.getLogger(__name__)
    economy = load_economy(args.economy)
    cfg = load_configuration().with_overrides(
        epsilon=args.epsilon,
        r0=args.r0,
        r_growth=args.r_growth,
        max_outer_iters=args.max_iters,
        delta=args.delta,
        multistart_k=args.multistart,
        workers=args.workers,
        seed=args.seed,
        augmenting=AUGMENTING_CHOICES[args.augmenting] if args.augmenting else None,
        ph_rho=args.ph_rho,
        ph_tol=args.ph_tol,
        ph_max_iter=args.ph_max_iter,
        ph_parallel=args.ph_parallel,
    )
    cfg.validate(economy.n_goods)
    start = parse_start(args.start)

    if economy.is_two_stage:
        failed = [report for report in check_recourse(economy) if not report.ok]
        if failed:
            logger.warning(f"{len(failed)} agent(s) fail the recourse check; solving anyway")

    if cfg.multistart_k > 1:
        if args.start != "centroid":
            logger.warning("--start is ignored with --multistart; runs start from the centroid and random points")
        p_star, trace = multistart_solve(economy, cfg)
    else:
        p_star, trace = solve(economy, start, cfg)

    evaluation = evaluate_market(economy, floor_prices(p_star, cfg.delta), cfg.ph)
    if args.trajectory:
        write_trajectory(trace, economy, args.trajectory)
    if args.summary:
        write_summary(build_summary(economy, p_star, trace, evaluation, cfg), args.summary)

    print(f"Status: {trace.status.value} after {trace.iterations} iterations")
    print(f"Residual: {trace.final_residual:.3e}")
    print("Prices (x100):")
    print(format_prices(economy, p_star))
    return EXIT_CONVERGED if trace.status is SolveStatus.CONVERGED else EXIT_MAX_ITER


def run_validate(args: argparse.Namespace) -> int:
    economy = load_economy(args.economy)
    print(
        f"{economy.name}: valid {economy.model_class.value} economy with {economy.n_goods} goods, "
        f"{len(economy.agents)} agents, {len(economy.scenarios)} scenarios"
    )
    return 0


def run_recourse(args: argparse.Namespace) -> int:
    economy = load_economy(args.economy)
    reports = check_recourse(economy)
    for report in reports:
        print(f"{report.agent}: {'ok' if report.ok else 'FAILED'}")
        for failure in report.failures:
            print(f"  {failure}")
    return 0 if all(report.ok for report in reports) else 1


def run_fixtures(args: argparse.Namespace) -> int:
    if args.export:
        for path in export_fixtures(args.export):
            print(path)
    else:
        for name in list_fixtures():
            print(name)
    return 0


def main(argv: Optional[list] = None) -> int:
    """Main CLI entry point."""
    parser = create_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    logger = logging.getLogger(__name__)

    commands = {
        "solve": run_solve,
        "validate": run_validate,
        "recourse": run_recourse,
        "fixtures": run_fixtures,
    }
    if args.command not in commands:
        parser.print_help()
        return 1

    try:
        return commands[args.command](args)
    except EconomyFileError as e:
        print(f"Invalid economy {e.source}:", file=sys.stderr)
        for error in e.errors:
            print(f"  {error}", file=sys.stderr)
        return EXIT_ERROR
    except ModelError as e:
        logger.error(f"Model error: {e}")
        print(f"Model error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
