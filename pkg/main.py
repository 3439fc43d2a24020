"""
Stochastic Game Solver - Main Script

This script solves safety and reachability objectives of concurrent and
turn-based stochastic games by strategy improvement.
"""

import argparse
import logging

from src.cli import COMMANDS, EXIT_INPUT, CliConfig, run
from src.game_solver import MODES


def _state_list(text: str):
    return [s.strip() for s in text.split(",") if s.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Stochastic Game Solver - strategy improvement for safety and reachability games"
    )

    parser.add_argument(
        "command",
        type=str,
        choices=COMMANDS,
        help="solve: run a solver; bounds: print termination bounds; "
             "validate: check the game file; oracle: run value iteration only"
    )

    parser.add_argument(
        "--game",
        type=str,
        required=True,
        help="Path to the game JSON file ('-' reads standard input)"
    )

    parser.add_argument(
        "--objective",
        type=str,
        choices=["safe", "reach"],
        default="safe",
        help="Objective of player 1: safe (stay in the set) or reach (visit the set) (default: safe)"
    )

    parser.add_argument(
        "--states",
        type=_state_list,
        default=[],
        help="Comma-separated states: the safe set F or the target set T"
    )

    parser.add_argument(
        "--mode",
        type=str,
        choices=MODES,
        default="dovetail",
        help="Solver: si (strategy improvement), vi (value iteration) or dovetail (default: dovetail)"
    )

    parser.add_argument(
        "--epsilon",
        type=float,
        default=1e-6,
        help="Dovetail stops once lower and upper bounds are epsilon apart (default: 1e-6)"
    )

    parser.add_argument(
        "--tau-eq",
        type=float,
        default=1e-9,
        help="Equality tolerance of the float backend (default: 1e-9)"
    )

    parser.add_argument(
        "--max-iters",
        type=int,
        default=10000,
        help="Maximum number of improvement steps (default: 10000)"
    )

    parser.add_argument(
        "--backend",
        type=str,
        choices=["float", "rational"],
        default="float",
        help="Number representation: float or exact rational (default: float)"
    )

    parser.add_argument(
        "--output",
        type=str,
        default=None,
        help="Write the result JSON to this file"
    )

    parser.add_argument(
        "--trace",
        type=str,
        default=None,
        help="Write the iteration trace JSON to this file"
    )

    parser.add_argument(
        "--csv",
        type=str,
        default=None,
        help="Write the per-state value table as CSV"
    )

    parser.add_argument(
        "--check-oracle",
        action="store_true",
        help="Compare the result with value iteration and report the gap"
    )

    parser.add_argument(
        "--local-only",
        action="store_true",
        help="Safety improvement without the turn-based reduction step"
    )

    parser.add_argument(
        "--threads",
        type=int,
        default=1,
        help="Worker threads for per-state evaluation (default: 1)"
    )

    parser.add_argument(
        "--iters",
        type=int,
        default=10000,
        help="Value-iteration rounds for the oracle command and --check-oracle (default: 10000)"
    )

    parser.add_argument(
        "--verbose",
        action="store_true",
        help="Log solver progress"
    )

    parser.add_argument(
        "--debug",
        action="store_true",
        help="Log every iteration"
    )

    return parser


def main(argv=None):
    """Main entry point for the stochastic game solver."""

    args = build_parser().parse_args(argv)

    level = logging.DEBUG if args.debug else logging.INFO if args.verbose else logging.WARNING
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    # Validate inputs
    try:
        config = CliConfig(
            command=args.command,
            game_path=args.game,
            objective=args.objective,
            set_states=args.states,
            mode=args.mode,
            epsilon=args.epsilon,
            tau_eq=args.tau_eq,
            max_iters=args.max_iters,
            backend=args.backend,
            output_path=args.output,
            trace_path=args.trace,
            csv_path=args.csv,
            check_oracle=args.check_oracle,
            local_only=args.local_only,
            threads=args.threads,
            iters=args.iters,
        )
        config.solver_config()
    except ValueError as e:
        print(f"Error: {str(e)}")
        return EXIT_INPUT

    return run(config)


if __name__ == "__main__":
    exit(main())
