"""
One-shot matrix games induced by a valuation.

At a state s the payoff of the move pair (a, b) is the expected value of
v after one step, M[a][b] = sum_t v(t) * delta(s, a, b)(t). Player 1
maximises, player 2 minimises.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from src.errors import EnumerationLimitError, InvalidSelectorError, LpError, PreconditionError
from src.game_model import ConcurrentGame, Distribution, PLAYER1, PLAYER2, Selector, Valuation
from src.numeric import NumericBackend, Number
from src.simplex import EQ, GE, LE, Infeasible, PivotLimit, Unbounded, maximize

logger = logging.getLogger(__name__)

# Largest |moves1(s)| + |moves2(s)| for which supports are enumerated
ENUMERATION_LIMIT = 24

Choice = Union[Selector, Distribution]


@dataclass(frozen=True)
class SupportPair:
    """Support A of an optimal selector and its exact counter-optimal set B."""

    A: Tuple[str, ...]
    B: Tuple[str, ...]
    witness: Distribution


def payoff_matrix(game: ConcurrentGame, v: Valuation, s: str) -> np.ndarray:
    """
    Payoff matrix of the one-shot game at s.

    Returns:
        Array of shape (|moves1(s)|, |moves2(s)|); object dtype in rational mode
    """
    backend = game.backend
    rows = [
        [game.delta[(s, a, b)].expectation(v) for b in game.moves2[s]]
        for a in game.moves1[s]
    ]
    return np.array(rows, dtype=backend.dtype).reshape(len(game.moves1[s]), len(game.moves2[s]))


def _row_lp(M: np.ndarray, backend: NumericBackend) -> Tuple[Number, List[Number]]:
    m, n = M.shape
    shift = M.min()
    P = M - shift
    # Variables: xi_0 .. xi_{m-1}, z
    rows, senses, rhs = [], [], []
    for j in range(n):
        rows.append([-P[i, j] for i in range(m)] + [backend.one])
        senses.append(LE)
        rhs.append(backend.zero)
    rows.append([backend.one] * m + [backend.zero])
    senses.append(EQ)
    rhs.append(backend.one)
    solution = maximize([backend.zero] * m + [backend.one], rows, senses, rhs, backend)
    return solution.objective + shift, _normalised(solution.x[:m], backend)


def _column_lp(M: np.ndarray, backend: NumericBackend) -> Tuple[Number, List[Number]]:
    m, n = M.shape
    shift = M.min()
    P = M - shift
    # Variables: eta_0 .. eta_{n-1}, w
    rows, senses, rhs = [], [], []
    for i in range(m):
        rows.append([P[i, j] for j in range(n)] + [-backend.one])
        senses.append(LE)
        rhs.append(backend.zero)
    rows.append([backend.one] * n + [backend.zero])
    senses.append(EQ)
    rhs.append(backend.one)
    solution = maximize([backend.zero] * n + [-backend.one], rows, senses, rhs, backend)
    return -solution.objective + shift, _normalised(solution.x[:n], backend)


def _normalised(weights: Sequence[Number], backend: NumericBackend) -> List[Number]:
    weights = [backend.clean(w) for w in weights]
    total = sum(weights)
    if backend.exact:
        return list(weights)
    return [w / total for w in weights]


def _point(k: int, size: int, backend: NumericBackend) -> List[Number]:
    return [backend.one if i == k else backend.zero for i in range(size)]


def solve_matrix_game(
    M: np.ndarray, backend: NumericBackend, column_strategy: bool = True
) -> Tuple[Number, List[Number], Optional[List[Number]]]:
    """
    Solve a zero-sum matrix game (rows maximise).

    Single-row and single-column games and pure saddle points are solved
    directly; everything else goes through the simplex.

    Args:
        M: payoff matrix
        backend: numeric backend
        column_strategy: also compute an optimal column strategy

    Returns:
        Tuple of (value, row strategy, column strategy or None)
    """
    m, n = M.shape
    if n == 1:
        i = max(range(m), key=lambda r: M[r, 0])
        return M[i, 0], _point(i, m, backend), [backend.one]
    if m == 1:
        j = min(range(n), key=lambda c: M[0, c])
        return M[0, j], [backend.one], _point(j, n, backend)

    row_mins = M.min(axis=1)
    col_maxs = M.max(axis=0)
    lower, upper = row_mins.max(), col_maxs.min()
    if lower == upper:
        i = max(range(m), key=lambda r: row_mins[r])
        j = min(range(n), key=lambda c: col_maxs[c])
        return lower, _point(i, m, backend), _point(j, n, backend)

    value, row = _row_lp(M, backend)
    col = _column_lp(M, backend)[1] if column_strategy else None
    return value, row, col


def _entry(choice: Choice, s: str) -> Distribution:
    return choice[s] if isinstance(choice, Selector) else choice


def _check_entry(game: ConcurrentGame, s: str, dist: Distribution, player: int) -> None:
    allowed = game.available(player, s)
    outside = [m for m in dist.support if m not in allowed]
    if outside:
        raise InvalidSelectorError(f"player {player} plays {outside} at {s}, available {list(allowed)}")


def pre_pair(game: ConcurrentGame, v: Valuation, s: str, xi1: Choice, xi2: Choice) -> Number:
    """Expected value of v after one step from s when both players mix."""
    d1, d2 = _entry(xi1, s), _entry(xi2, s)
    _check_entry(game, s, d1, PLAYER1)
    _check_entry(game, s, d2, PLAYER2)
    return sum(
        pa * pb * game.delta[(s, a, b)].expectation(v)
        for a, pa in d1.items()
        for b, pb in d2.items()
    )


def _column_values(game: ConcurrentGame, v: Valuation, s: str, dist: Distribution) -> List[Number]:
    return [
        sum(p * game.delta[(s, a, b)].expectation(v) for a, p in dist.items())
        for b in game.moves2[s]
    ]


def pre_one_sel(game: ConcurrentGame, v: Valuation, s: str, xi1: Choice) -> Number:
    """Value player 1 guarantees at s by playing xi1 for one step."""
    dist = _entry(xi1, s)
    _check_entry(game, s, dist, PLAYER1)
    return min(_column_values(game, v, s, dist))


def pre_one(game: ConcurrentGame, v: Valuation, s: str) -> Tuple[Number, Distribution]:
    """
    Matrix-game value at s and one optimal mixed move of player 1.

    Returns:
        Tuple of (value, optimal distribution over moves1(s))
    """
    backend = game.backend
    M = payoff_matrix(game, v, s)
    try:
        value, row, _ = solve_matrix_game(M, backend, column_strategy=False)
    except (Infeasible, Unbounded, PivotLimit) as exc:
        raise LpError(f"matrix game LP failed: {exc}", state=s)
    dist = Distribution({a: p for a, p in zip(game.moves1[s], row)})
    return value, dist


def pre_one_valuation(game: ConcurrentGame, v: Valuation, threads: int = 1) -> Valuation:
    """Pre_1(v) at every state; with threads > 1 states are evaluated in a pool."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(lambda s: pre_one(game, v, s)[0], game.states))
    else:
        values = [pre_one(game, v, s)[0] for s in game.states]
    return Valuation(dict(zip(game.states, values)))


def opt_sel_with_support(
    game: ConcurrentGame,
    v: Valuation,
    s: str,
    A: Sequence[str],
    value: Optional[Number] = None
) -> Optional[Distribution]:
    """
    Optimal move distribution at s whose support is exactly A.

    Solved as: maximise t subject to xi(a) >= t on A, sum xi = 1 and every
    column guaranteeing at least the value. A exists iff the optimum t is
    positive (at least pi_min in float mode).

    Returns:
        The witness distribution, or None if no optimal selector has support A
    """
    backend = game.backend
    A = tuple(a for a in game.moves1[s] if a in set(A))
    if not A:
        raise ValueError(f"Empty support requested at state {s}")
    if value is None:
        value = pre_one(game, v, s)[0]
    M = payoff_matrix(game, v, s)
    index = {a: i for i, a in enumerate(game.moves1[s])}
    n = M.shape[1]

    if len(A) == 1:
        i = index[A[0]]
        if all(backend.ge(M[i, j], value) for j in range(n)):
            return Distribution.point(A[0], backend)
        return None
    if n == 1:
        if all(backend.ge(M[index[a], 0], value) for a in A):
            return Distribution.uniform(A, backend)
        return None

    k = len(A)
    # Variables: xi_a for a in A, t
    rows, senses, rhs = [], [], []
    for pos in range(k):
        rows.append([-backend.one if q == pos else backend.zero for q in range(k)] + [backend.one])
        senses.append(LE)
        rhs.append(backend.zero)
    for j in range(n):
        rows.append([M[index[a], j] for a in A] + [backend.zero])
        senses.append(GE)
        rhs.append(value)
    rows.append([backend.one] * k + [backend.zero])
    senses.append(EQ)
    rhs.append(backend.one)
    try:
        solution = maximize([backend.zero] * k + [backend.one], rows, senses, rhs, backend)
    except Infeasible:
        return None
    except (Unbounded, PivotLimit) as exc:
        raise LpError(f"support LP failed: {exc}", state=s)
    if not backend.is_positive(solution.x[k]):
        return None
    witness = Distribution(dict(zip(A, _normalised(solution.x[:k], backend))))
    # Phase-one residue may leave a column just below the value
    if not backend.ge(min(_column_values(game, v, s, witness)), value):
        return None
    return witness


def counter_optimal(
    game: ConcurrentGame, v: Valuation, s: str, xi1: Choice, value: Optional[Number] = None
) -> Tuple[str, ...]:
    """
    Player-2 moves that hold player 1 to exactly the value against xi1.

    Raises:
        PreconditionError: xi1 is not optimal at s
    """
    backend = game.backend
    dist = _entry(xi1, s)
    _check_entry(game, s, dist, PLAYER1)
    if value is None:
        value = pre_one(game, v, s)[0]
    columns = _column_values(game, v, s, dist)
    if not backend.ge(min(columns), value):
        raise PreconditionError(
            f"selector at {s} guarantees {backend.format(min(columns))} < value {backend.format(value)}"
        )
    return tuple(b for b, x in zip(game.moves2[s], columns) if backend.le(x, value))


def exact_pair_witness(
    game: ConcurrentGame,
    v: Valuation,
    s: str,
    A: Sequence[str],
    B: Sequence[str],
    value: Optional[Number] = None
) -> Optional[Distribution]:
    """
    Optimal distribution with support exactly A and counter-optimal set exactly B.

    Solved as: maximise t subject to xi(a) >= t on A, columns in B tight,
    columns outside B at least value + t.

    Returns:
        The witness distribution, or None if (A, B) is not realised
    """
    backend = game.backend
    A = tuple(a for a in game.moves1[s] if a in set(A))
    B = tuple(b for b in game.moves2[s] if b in set(B))
    if not A or not B:
        return None
    if value is None:
        value = pre_one(game, v, s)[0]
    M = payoff_matrix(game, v, s)
    index = {a: i for i, a in enumerate(game.moves1[s])}
    moves2 = game.moves2[s]

    if len(A) == 1 or len(moves2) == 1:
        witness = opt_sel_with_support(game, v, s, A, value)
        if witness is not None and counter_optimal(game, v, s, witness, value) == B:
            return witness
        return None

    k = len(A)
    tau = backend.tau_eq
    rows, senses, rhs = [], [], []
    for pos in range(k):
        rows.append([-backend.one if q == pos else backend.zero for q in range(k)] + [backend.one])
        senses.append(LE)
        rhs.append(backend.zero)
    for j, b in enumerate(moves2):
        coefs = [M[index[a], j] for a in A]
        if b in B:
            rows.append(coefs + [backend.zero])
            senses.append(EQ)
            rhs.append(value)
        else:
            rows.append(coefs + [-backend.one])
            senses.append(GE)
            rhs.append(value + tau)
    rows.append([backend.one] * k + [backend.zero])
    senses.append(EQ)
    rhs.append(backend.one)
    try:
        solution = maximize([backend.zero] * k + [backend.one], rows, senses, rhs, backend)
    except Infeasible:
        return None
    except (Unbounded, PivotLimit) as exc:
        raise LpError(f"counter-set LP failed: {exc}", state=s)
    if not backend.is_positive(solution.x[k]):
        return None
    witness = Distribution(dict(zip(A, _normalised(solution.x[:k], backend))))
    if witness.support != A:
        return None
    if not backend.ge(min(_column_values(game, v, s, witness)), value):
        return None
    if counter_optimal(game, v, s, witness, value) != B:
        return None
    return witness


def tight_moves(game: ConcurrentGame, v: Valuation, s: str) -> Tuple[Number, Tuple[str, ...]]:
    """
    Player-1 moves that can carry weight in some optimal selector at s.

    A move qualifies when it earns the value against an optimal player-2
    distribution. Moves below the value there get zero weight in every
    optimal selector.

    Returns:
        Tuple of (value, qualifying moves in move order)
    """
    backend = game.backend
    M = payoff_matrix(game, v, s)
    try:
        value, _, column = solve_matrix_game(M, backend)
    except (Infeasible, Unbounded, PivotLimit) as exc:
        raise LpError(f"matrix game LP failed: {exc}", state=s)
    earned = M.dot(np.array(column, dtype=backend.dtype))
    return value, tuple(a for a, x in zip(game.moves1[s], earned) if backend.ge(x, value))


def _nonempty_subsets(items: Sequence[str]):
    for size in range(1, len(items) + 1):
        yield from combinations(items, size)


def opt_sel_count(
    game: ConcurrentGame, v: Valuation, s: str, limit: int = ENUMERATION_LIMIT
) -> List[SupportPair]:
    """
    Every (support, counter-optimal set) pair realised by an optimal selector at s.

    Supports are enumerated by increasing size, then lexicographically in
    move order; the same order is used for counter sets.

    Raises:
        EnumerationLimitError: |moves1(s)| + |moves2(s)| exceeds limit
    """
    moves1, moves2 = game.moves1[s], game.moves2[s]
    bits = len(moves1) + len(moves2)
    if bits > limit:
        raise EnumerationLimitError(s, bits, limit)
    value, tight = tight_moves(game, v, s)
    pairs: List[SupportPair] = []
    for A in _nonempty_subsets(tight):
        base = opt_sel_with_support(game, v, s, A, value)
        if base is None:
            continue
        base_counter = counter_optimal(game, v, s, base, value)
        for B in _nonempty_subsets(moves2):
            if B == base_counter:
                witness = base
            else:
                witness = exact_pair_witness(game, v, s, A, B, value)
            if witness is not None:
                pairs.append(SupportPair(A=tuple(A), B=tuple(B), witness=witness))
    logger.debug("state %s: %d support pairs", s, len(pairs))
    return pairs
