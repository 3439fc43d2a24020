"""Solver pipeline: dispatch an objective to an algorithm and save the outputs."""

import json
import logging
import os
from pathlib import Path
from typing import Optional

import pandas as pd

from src.game_model import AnyGame, Objective, PLAYER1, SAFE, as_concurrent, swap_players
from src.improvement import (
    Config,
    iterate_values,
    solve_dovetail,
    solve_reach_si,
    solve_safety_si,
)
from src.results import ITERATION_CAP, PRE_FIXPOINT, Certificate, SolveResult

logger = logging.getLogger(__name__)

MODES = ("si", "vi", "dovetail")

# Value iteration stops once no state moves by more than this
VI_TOLERANCE = 1e-12


class GameSolver:
    """Runs one of the solving modes on a game and writes result files."""

    def __init__(self, config: Config, output_dir: Optional[str] = None):
        """
        Initialize game solver.

        Args:
            config: solver configuration
            output_dir: directory for relative output paths (current directory when omitted)
        """
        self.config = config
        self.backend = config.make_backend()
        self.output_dir = output_dir
        if output_dir is not None:
            os.makedirs(output_dir, exist_ok=True)

    def solve(self, game: AnyGame, objective: Objective, mode: str = "dovetail") -> SolveResult:
        """
        Solve player 1's objective.

        Args:
            game: concurrent or turn-based game
            objective: Safe(F) or Reach(T)
            mode: 'si', 'vi' or 'dovetail'

        Returns:
            SolveResult; for reachability in dovetail mode the strategy is not tracked
        """
        if mode not in MODES:
            raise ValueError(f"Invalid mode: {mode}")
        game = game.with_backend(self.backend)
        logger.info("solving %s objective with mode %s", objective.kind, mode)

        if mode == "vi":
            result = self._value_iteration(game, objective)
        elif mode == "si":
            if objective.kind == SAFE:
                result = solve_safety_si(game, objective.states, self.config)
            else:
                result = solve_reach_si(game, objective.states, self.config, player=PLAYER1)
        elif objective.kind == SAFE:
            result = solve_dovetail(game, objective.states, self.config)
        else:
            # Player 1 reaching T is player 2 staying in S \ T on the swapped game
            swapped = swap_players(as_concurrent(game))
            safe = [s for s in swapped.states if s not in objective.states]
            dual = solve_dovetail(swapped, safe, self.config)
            result = SolveResult(
                values=dual.opponent_values,
                strategy=None,
                certificate=dual.certificate,
                backend=self.backend,
                trace=dual.trace,
                opponent_values=dual.values,
                notes=["reachability solved through the opponent's safety game; strategy not tracked"],
            )

        if self.config.oracle_check and mode != "vi":
            result.oracle_gap = self.oracle_gap(game, objective, result)
        return result

    def _value_iteration(self, game: AnyGame, objective: Objective) -> SolveResult:
        sequence = iterate_values(game, objective, self.config.threads)
        v = next(sequence)
        certificate = Certificate(ITERATION_CAP)
        rounds = 0
        for rounds in range(1, self.config.oracle_iters + 1):
            nxt = next(sequence)
            change = max(abs(nxt[s] - v[s]) for s in v)
            v = nxt
            if change <= VI_TOLERANCE:
                certificate = Certificate(PRE_FIXPOINT)
                break
        logger.info("value iteration: %d rounds, %s", rounds, certificate.kind)
        return SolveResult(
            values=v,
            strategy=None,
            certificate=certificate,
            backend=self.backend,
            notes=[f"value iteration, {rounds} rounds"],
        )

    def oracle_gap(self, game: AnyGame, objective: Objective, result: SolveResult):
        """Largest statewise difference between the result and value iteration."""
        oracle = self._value_iteration(game, objective).values
        return max(abs(result.values[s] - oracle[s]) for s in result.values)

    def _resolve(self, path: str) -> Path:
        path = Path(path)
        if self.output_dir is not None and not path.is_absolute():
            path = Path(self.output_dir) / path
        return path

    def save_results(self, result: SolveResult, path: str) -> Path:
        """Write the result JSON (sorted keys, fixed number formatting)."""
        output_path = self._resolve(path)
        output_path.write_text(json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return output_path

    def save_trace(self, result: SolveResult, path: str) -> Optional[Path]:
        if result.trace is None:
            logger.warning("no trace to save for this mode")
            return None
        output_path = self._resolve(path)
        output_path.write_text(json.dumps(result.trace.to_dict(self.backend), indent=2) + "\n", encoding="utf-8")
        return output_path

    def save_table(self, result: SolveResult, path: str) -> Path:
        output_path = self._resolve(path)
        df: pd.DataFrame = result.to_dataframe()
        df.to_csv(output_path, index=False)
        return output_path
