"""Command-line front end: parse a game, run a command, write reports."""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import pandas as pd

from src.bounds import termination_bounds
from src.errors import GameSolverError, InvalidGameError
from src.game_io import load_game
from src.game_model import AnyGame, Objective
from src.game_solver import MODES, GameSolver
from src.improvement import Config, value_iteration
from src.numeric import get_backend
from src.results import ITERATION_CAP, format_valuation

logger = logging.getLogger(__name__)

COMMANDS = ("solve", "bounds", "validate", "oracle")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ITERATION_CAP = 3
EXIT_SOLVER = 4


@dataclass
class CliConfig:
    """Options of one CLI invocation."""

    command: str
    game_path: str
    objective: str = "safe"
    set_states: List[str] = field(default_factory=list)
    mode: str = "dovetail"
    epsilon: float = 1e-6
    tau_eq: float = 1e-9
    max_iters: int = 10000
    backend: str = "float"
    output_path: Optional[str] = None
    trace_path: Optional[str] = None
    csv_path: Optional[str] = None
    check_oracle: bool = False
    local_only: bool = False
    threads: int = 1
    iters: int = 10000

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"Invalid command: {self.command}")
        if self.objective not in ("safe", "reach"):
            raise ValueError(f"Invalid objective: {self.objective}")
        if self.mode not in MODES:
            raise ValueError(f"Invalid mode: {self.mode}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.iters < 0:
            raise ValueError(f"iters must be nonnegative, got {self.iters}")

    def solver_config(self) -> Config:
        return Config(
            epsilon=self.epsilon,
            tau_eq=self.tau_eq,
            max_iters=self.max_iters,
            backend=self.backend,
            oracle_check=self.check_oracle,
            non_local_step=not self.local_only,
            threads=self.threads,
            oracle_iters=self.iters,
        )


def parse_game(path: str, backend: str = "float", tau_eq: float = 1e-9) -> AnyGame:
    """
    Read and validate a game file.

    Args:
        path: game file, or '-' for standard input
        backend: 'float' or 'rational'
        tau_eq: comparison tolerance for the float backend

    Returns:
        ConcurrentGame or TurnBasedGame

    Raises:
        InvalidGameError: unreadable file, malformed JSON, schema violation or invariant diagnostics
    """
    return load_game(path, get_backend(backend, tau_eq))


def _write_json(document, path: str) -> None:
    Path(path).write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")


def _print_table(df: pd.DataFrame) -> None:
    print(df.to_string(index=False))


def _bounds(game: AnyGame, config: CliConfig) -> int:
    report = termination_bounds(game, config.epsilon)
    df = pd.DataFrame(
        [{"quantity": key, "value": value} for key, value in report.to_dict().items()]
    )
    _print_table(df)
    if config.output_path:
        _write_json(report.to_dict(), config.output_path)
    return EXIT_OK


def _oracle(game: AnyGame, config: CliConfig) -> int:
    objective = Objective(config.objective, frozenset(config.set_states))
    values = value_iteration(game, objective, config.iters, threads=config.threads)
    formatted = format_valuation(values, game.backend)
    _print_table(pd.DataFrame({"state": list(formatted), "value": list(formatted.values())}))
    if config.output_path:
        _write_json({"values": formatted, "iterations": config.iters}, config.output_path)
    return EXIT_OK


def _solve(game: AnyGame, config: CliConfig) -> int:
    solver = GameSolver(config.solver_config())
    objective = Objective(config.objective, frozenset(config.set_states))
    result = solver.solve(game, objective, config.mode)

    print(f"Certificate: {result.certificate.kind}")
    print(f"Iterations: {result.iterations}")
    if result.oracle_gap is not None:
        print(f"Oracle gap: {result.backend.format(result.oracle_gap)}")
    for note in result.notes:
        print(f"Note: {note}")
    print()
    _print_table(result.to_dataframe())

    if config.output_path:
        print(f"Results saved to: {solver.save_results(result, config.output_path)}")
    if config.trace_path:
        saved = solver.save_trace(result, config.trace_path)
        if saved is not None:
            print(f"Trace saved to: {saved}")
    if config.csv_path:
        print(f"Table saved to: {solver.save_table(result, config.csv_path)}")

    if result.certificate.kind == ITERATION_CAP:
        return EXIT_ITERATION_CAP
    return EXIT_OK


def run(config: CliConfig) -> int:
    """
    Execute one CLI command.

    Args:
        config: parsed command-line options

    Returns:
        Exit code: 0 success, 2 bad input, 3 iteration cap, 4 solver error
    """
    try:
        game = parse_game(config.game_path, config.backend, config.tau_eq)
    except InvalidGameError as exc:
        print(f"Error: {exc}")
        return EXIT_INPUT

    if config.command == "validate":
        print(f"OK: {type(game).__name__} with {len(game.states)} states")
        return EXIT_OK

    unknown = sorted(set(config.set_states) - set(game.states))
    if unknown:
        print(f"Error: unknown states in --states: {', '.join(unknown)}")
        return EXIT_INPUT

    try:
        if config.command == "bounds":
            return _bounds(game, config)
        if config.command == "oracle":
            return _oracle(game, config)
        return _solve(game, config)
    except GameSolverError as exc:
        logger.debug("solver failure", exc_info=True)
        print(f"Error: {exc}")
        return EXIT_SOLVER
