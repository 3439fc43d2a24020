"""Solver results and their export formats."""

from dataclasses import dataclass
from typing import Dict, List, Optional

import pandas as pd

from src.game_model import Selector, Valuation
from src.numeric import NumericBackend

OPTIMAL = "optimal"
EPSILON = "epsilon"
ITERATION_CAP = "iteration-cap"
PRE_FIXPOINT = "pre-fixpoint"


@dataclass(frozen=True)
class Certificate:
    """How a run terminated."""

    kind: str
    epsilon: Optional[float] = None

    def __post_init__(self):
        if self.kind not in (OPTIMAL, EPSILON, ITERATION_CAP, PRE_FIXPOINT):
            raise ValueError(f"Invalid certificate kind: {self.kind}")

    @property
    def converged(self) -> bool:
        return self.kind != ITERATION_CAP

    def to_dict(self) -> Dict:
        result = {"type": self.kind}
        if self.kind == EPSILON:
            result["epsilon"] = self.epsilon
        return result


def format_valuation(v: Valuation, backend: NumericBackend) -> Dict[str, str]:
    return {s: backend.format(x) for s, x in v.items()}


def format_selector(selector: Selector, backend: NumericBackend) -> Dict[str, Dict[str, str]]:
    return {
        s: {move: backend.format(p) for move, p in dist.items()}
        for s, dist in selector.choice.items()
    }


class SolveResult:
    """Final valuation, witness strategy, trace and termination certificate of one solver run."""

    def __init__(
        self,
        values: Valuation,
        strategy: Optional[Selector],
        certificate: Certificate,
        backend: NumericBackend,
        trace=None,
        opponent_values: Optional[Valuation] = None,
        notes: Optional[List[str]] = None
    ):
        """
        Initialize solve result.

        Args:
            values: lower bound on (or exact) value of player 1's objective
            strategy: player-1 witness selector, if the solver produces one
            certificate: termination certificate
            backend: backend used to format numbers
            trace: SiTrace of the run, if any
            opponent_values: dovetail only, player 2's lower bound u for the complementary objective
            notes: free-form remarks reported alongside the result
        """
        self.values = values
        self.strategy = strategy
        self.certificate = certificate
        self.backend = backend
        self.trace = trace
        self.opponent_values = opponent_values
        self.notes = list(notes or [])
        self.oracle_gap = None

    @property
    def iterations(self) -> int:
        return self.trace.total if self.trace is not None else 0

    @property
    def upper_values(self) -> Optional[Valuation]:
        if self.opponent_values is None:
            return None
        return self.opponent_values.complement(self.backend)

    def to_dict(self) -> Dict:
        """Result JSON document."""
        result = {
            "values": format_valuation(self.values, self.backend),
            "strategy": format_selector(self.strategy, self.backend) if self.strategy is not None else {},
            "certificate": self.certificate.to_dict(),
            "iterations": self.iterations,
        }
        if self.opponent_values is not None:
            result["upper"] = format_valuation(self.upper_values, self.backend)
        if self.oracle_gap is not None:
            result["oracle_gap"] = self.backend.format(self.oracle_gap)
        if self.notes:
            result["notes"] = self.notes
        return result

    def to_dataframe(self) -> pd.DataFrame:
        """One row per state: value, optional upper bound and strategy."""
        rows = []
        upper = self.upper_values
        for s, x in self.values.items():
            row = {"state": s, "value": self.backend.format(x)}
            if upper is not None:
                row["upper"] = self.backend.format(upper[s])
            if self.strategy is not None and s in self.strategy.choice:
                row["strategy"] = " ".join(
                    f"{move}:{self.backend.format(p)}" for move, p in self.strategy[s].items()
                )
            rows.append(row)
        return pd.DataFrame(rows)
