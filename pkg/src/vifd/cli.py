"""Command line front end: single solves and benchmark batches."""

from __future__ import annotations

import argparse
import sys

from .bench import (
    ExperimentConfig,
    PRESET_NAMES,
    configs_from_file,
    emit,
    emit_many,
    exit_code_for,
    preset_configs,
    run_experiment,
)
from .operators import PROBLEM_NAMES, UnknownProblem
from .solver import BetaSchedule, SolverParams


def _parse_vector(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"cannot parse vector {text!r}") from exc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vifd",
        description=(
            "Feasible-direction projection solver for variational inequalities "
            "with set-valued operators."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="run one problem from one start point")
    sp.add_argument("--problem", required=True, choices=PROBLEM_NAMES)
    sp.add_argument("--x0", required=True, type=_parse_vector,
                    help="comma-separated start point, e.g. 0.5,0.5")
    sp.add_argument("--delta", type=float, default=0.01)
    sp.add_argument("--theta", type=float, default=0.5)
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--tol", type=float, default=1e-8,
                    help="tolerance on the squared stop residuals")
    sp.add_argument("--tol-step4", type=float, default=1e-12,
                    help="tolerance on consecutive-iterate distance")
    sp.add_argument("--max-iter", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0,
                    help="seed for randomized problem data")
    sp.add_argument("--a", type=float, default=None,
                    help="feasible-set scale where applicable")
    sp.add_argument("--output", choices=("csv", "json", "table"), default="table")

    bp = sub.add_parser("bench", help="run a preset or configured batch")
    group = bp.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", choices=PRESET_NAMES)
    group.add_argument("--config", help="path to a json experiment file")
    bp.add_argument("--output", choices=("csv", "json", "table"), default=None,
                    help="override the configured output format")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            params = SolverParams(
                delta=args.delta,
                theta=args.theta,
                beta_schedule=BetaSchedule.constant(args.beta),
                tol_residual=args.tol,
                tol_step4=args.tol_step4,
                max_outer_iterations=args.max_iter,
            )
            config = ExperimentConfig(
                problem=args.problem,
                starts=[args.x0],
                params=params,
                a=args.a,
                seed=args.seed,
                output_format=args.output,
            )
            rows = run_experiment(config)
            print(emit(rows, args.output, config))
            return exit_code_for(rows)

        configs = (
            preset_configs(args.preset)
            if args.preset
            else configs_from_file(args.config)
        )
        results = [(cfg, run_experiment(cfg)) for cfg in configs]
        fmt = args.output or configs[0].output_format
        print(emit_many(results, fmt))
        return exit_code_for([row for _, rows in results for row in rows])
    except (ValueError, UnknownProblem, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
