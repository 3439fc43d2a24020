"""Exception hierarchy for the game solver."""

from typing import Iterable, List, Optional


class GameSolverError(Exception):
    """Root of all errors raised by the solver library."""


class InvalidGameError(GameSolverError, ValueError):
    """A game violates one or more structural invariants."""

    def __init__(self, diagnostics: Iterable, message: Optional[str] = None):
        self.diagnostics: List = list(diagnostics)
        if message is None:
            lines = [str(d) for d in self.diagnostics]
            message = "invalid game:\n  " + "\n  ".join(lines) if lines else "invalid game"
        super().__init__(message)


class GameFormatError(InvalidGameError):
    """Game file is malformed or does not follow the schema."""

    def __init__(self, message: str):
        super().__init__([message], message)


class InvalidSelectorError(GameSolverError, ValueError):
    """Selector plays a move that is not available, or misses a state."""


class PreconditionError(GameSolverError, ValueError):
    """An operation was called with inputs violating its precondition."""


class ImproperSelectorError(PreconditionError):
    """Selector admits an end component that avoids the goal."""

    def __init__(self, component, iteration: Optional[int] = None):
        self.component = component
        self.iteration = iteration
        where = f" at iteration {iteration}" if iteration is not None else ""
        states = ", ".join(sorted(component.states)) if component is not None else "?"
        super().__init__(f"selector is not proper{where}: end component {{{states}}} avoids the goal")


class LpError(GameSolverError, RuntimeError):
    """The simplex solver failed on a problem that should be solvable."""

    def __init__(self, message: str, state: Optional[str] = None):
        self.state = state
        if state is not None:
            message = f"{message} (state {state})"
        super().__init__(message)


class EnumerationLimitError(GameSolverError):
    """Support enumeration at a state would be too large."""

    def __init__(self, state: str, bits: int, limit: int):
        self.state = state
        self.bits = bits
        super().__init__(
            f"state {state}: |moves1| + |moves2| = {bits} exceeds the enumeration limit {limit}"
        )
