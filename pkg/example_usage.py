"""
Example usage of the Stochastic Game Solver.

This script demonstrates how to use the solver programmatically.
"""

from src.bounds import termination_bounds
from src.game_io import load_game
from src.game_model import REACH, SAFE, Objective
from src.game_solver import GameSolver
from src.improvement import Config
from src.numeric import RationalBackend


def example_basic_usage():
    """
    Basic example: safety on a concurrent matching game, solved by dovetailing.
    """
    game = load_game("fixtures/hide.json")

    solver = GameSolver(Config(epsilon=1e-6), output_dir="./outputs")
    result = solver.solve(game, Objective(SAFE, {"home", "field"}), mode="dovetail")

    solver.save_results(result, "hide.json")

    print(f"Certificate: {result.certificate.kind}")
    print(result.to_dataframe())


def example_exact_turn_based():
    """
    Exact values on a turn-based game with the rational backend.
    """
    game = load_game("fixtures/ex1.json", RationalBackend())

    solver = GameSolver(Config(backend="rational"), output_dir="./outputs")
    result = solver.solve(game, Objective(SAFE, {"s0", "s1", "s2", "s3", "s4", "s5"}), mode="si")

    solver.save_trace(result, "ex1_trace.json")
    solver.save_table(result, "ex1_values.csv")
    print(result.to_dataframe())


def example_reachability_bounds():
    """
    Reachability values and termination bounds on a binary turn-based game.
    """
    game = load_game("fixtures/binary_tb.json", RationalBackend())

    solver = GameSolver(Config(backend="rational", oracle_check=True))
    result = solver.solve(game, Objective(REACH, {"t"}), mode="si")
    print(result.to_dataframe())
    print(f"Gap to value iteration: {result.oracle_gap}")

    print(termination_bounds(game, 1e-6).to_dict())


if __name__ == "__main__":
    print("Stochastic Game Solver - Example Usage")
    print("=" * 50)
    print()
    print("To run examples, uncomment the function calls below")
    print()
    print("Available examples:")
    print("1. example_basic_usage()          - Dovetailing on a concurrent game")
    print("2. example_exact_turn_based()     - Exact safety values with traces")
    print("3. example_reachability_bounds()  - Reachability and termination bounds")
    print()
    print("For command-line usage, run:")
    print("  python main.py solve --game fixtures/hide.json --states home,field")
