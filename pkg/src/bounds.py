"""Termination-bound calculators."""

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple

from src.game_model import AnyGame, OWNER_P1, TurnBasedGame, as_concurrent


@dataclass(frozen=True)
class BoundsReport:
    """
    Bounds on value denominators, strategy counts and iteration counts.

    Fields that do not apply to the game are None.
    """

    num_states: int
    num_random: int
    num_player1: int
    turn_based: bool
    binary: bool
    denominator_bound: Optional[int]
    verified_denominator_bound: Optional[int]
    strategy_bound: int
    si_iteration_bound: Optional[int]
    delta_bits: int
    delta_bits_approximate: bool
    epsilon: float
    k_uniform: Optional[float]
    log10_k_uniform_iterations: Optional[float]

    def to_dict(self) -> Dict:
        return asdict(self)


def _bits(p) -> int:
    q = p if isinstance(p, Fraction) else Fraction(repr(float(p)))
    return q.numerator.bit_length() + q.denominator.bit_length()


def transition_bit_size(game: AnyGame) -> Tuple[int, bool]:
    """
    |delta|: bits of numerator plus denominator over all transition entries.

    Turn-based games are measured in their concurrent encoding. Float
    probabilities are read back as their shortest decimal, so the count is
    flagged approximate.

    Returns:
        Tuple of (bit count, approximate flag)
    """
    g = as_concurrent(game)
    total = sum(_bits(p) for dist in g.delta.values() for p in dist.values())
    return total, not g.backend.exact


def k_uniform_bound(num_states: int, delta_bits: int, epsilon: float) -> float:
    """k = 192 |S|^4 ln(4 |delta|) / epsilon^2."""
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    return 192 * num_states ** 4 * math.log(4 * delta_bits) / epsilon ** 2


def termination_bounds(game: AnyGame, epsilon: float) -> BoundsReport:
    """
    Compute the bounds report for a game.

    Args:
        game: concurrent or turn-based game
        epsilon: precision for the k-uniform bound

    Returns:
        BoundsReport
    """
    turn_based = isinstance(game, TurnBasedGame)
    if turn_based:
        num_random = len(game.random_states)
        player1 = game.player_states(OWNER_P1)
        strategy_bound = math.prod(len(game.edges[s]) for s in player1)
        binary = game.is_binary()
    else:
        num_random = 0
        player1 = list(game.states)
        strategy_bound = math.prod(len(game.moves1[s]) for s in game.states)
        binary = False
    num_states = len(game.states)

    denominator = verified = si_bound = None
    if turn_based and binary:
        denominator = 4 ** max(num_random - 1, 0)
        verified = 4 ** num_random
        si_bound = num_states * denominator

    delta_bits, approximate = transition_bit_size(game)
    k = log_iterations = None
    if epsilon > 0 and delta_bits > 0:
        k = k_uniform_bound(num_states, delta_bits, epsilon)
        log_iterations = 2 * delta_bits * math.log10(k)

    return BoundsReport(
        num_states=num_states,
        num_random=num_random,
        num_player1=len(player1),
        turn_based=turn_based,
        binary=binary,
        denominator_bound=denominator,
        verified_denominator_bound=verified,
        strategy_bound=strategy_bound,
        si_iteration_bound=si_bound,
        delta_bits=delta_bits,
        delta_bits_approximate=approximate,
        epsilon=epsilon,
        k_uniform=k,
        log10_k_uniform_iterations=log_iterations,
    )
