"""Attractors and almost-sure winning sets."""

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Optional, Set, Tuple, Union

from src.game_model import (
    ConcurrentGame,
    Distribution,
    OWNER_P1,
    OWNER_P2,
    OWNER_RANDOM,
    PLAYER1,
    PLAYER2,
    Selector,
    TurnBasedGame,
    other,
    swap_players,
)

logger = logging.getLogger(__name__)

SupportMap = Dict[str, Tuple[str, ...]]


@dataclass(frozen=True)
class QualitativeResult:
    """
    Winning set with its witness.

    Attributes:
        winning: the winning states
        witness: pure Selector (turn-based) or state -> move support (concurrent)
    """

    winning: FrozenSet[str]
    witness: Union[Selector, SupportMap]


def _owner_tag(player: int) -> str:
    return OWNER_P1 if player == PLAYER1 else OWNER_P2


def attractor_tb(game: TurnBasedGame, player: int, target: Iterable[str]) -> Tuple[Set[str], Selector]:
    """
    Positive-probability attractor of a player in a turn-based game.

    A_0 = target. A_{i+1} adds the player's states and random states with
    some successor in A_i, and opponent states whose successors all lie in A_i.

    Args:
        game: turn-based game
        player: 1 or 2
        target: target states

    Returns:
        Tuple of (attractor, pure selector on the player's newly added states)
    """
    own = _owner_tag(player)
    attractor = set(target)
    choice: Dict[str, Distribution] = {}
    while True:
        layer = []
        for s in game.states:
            if s in attractor:
                continue
            succ = game.edges[s]
            tag = game.owner[s]
            if tag == own:
                hit = next((t for t in succ if t in attractor), None)
                if hit is not None:
                    choice[s] = Distribution.point(hit, game.backend)
                    layer.append(s)
            elif tag == OWNER_RANDOM:
                if any(t in attractor for t in succ):
                    layer.append(s)
            elif all(t in attractor for t in succ):
                layer.append(s)
        if not layer:
            break
        attractor.update(layer)
    return attractor, Selector(player, choice)


def almost_sure_safe_tb(game: TurnBasedGame, player: int, safe: Iterable[str]) -> QualitativeResult:
    """
    States where the player keeps the play inside `safe` with probability 1.

    The complement is the attractor of the opponent (with chance on the
    opponent's side) to the unsafe states.
    """
    safe = set(safe)
    unsafe = [s for s in game.states if s not in safe]
    losing, _ = attractor_tb(game, other(player), unsafe)
    winning = frozenset(s for s in game.states if s not in losing)
    own = _owner_tag(player)
    choice = {}
    for s in game.states:
        if s in winning and game.owner[s] == own:
            stay = next(t for t in game.edges[s] if t in winning)
            choice[s] = Distribution.point(stay, game.backend)
    return QualitativeResult(winning=winning, witness=Selector(player, choice))


def almost_sure_safe_concurrent(game: ConcurrentGame, player: int, F: Iterable[str]) -> QualitativeResult:
    """
    States where the player stays in F forever with probability 1.

    Greatest fixpoint: keep s while some nonempty move set A of the player
    keeps every successor inside the current set against all opponent moves.
    States are processed in input order; the loop ends after a round that
    removes nothing.
    """
    if player == PLAYER2:
        return almost_sure_safe_concurrent(swap_players(game), PLAYER1, F)
    current = set(F) & set(game.states)
    support: SupportMap = {}
    rounds = 0
    while True:
        rounds += 1
        removed = False
        for s in game.states:
            if s not in current:
                continue
            safe_moves = tuple(
                a for a in game.moves1[s]
                if all(set(game.delta[(s, a, b)].support) <= current for b in game.moves2[s])
            )
            if safe_moves:
                support[s] = safe_moves
            else:
                current.discard(s)
                support.pop(s, None)
                removed = True
        if not removed:
            break
    logger.debug("almost-sure safety fixpoint after %d rounds: %d states", rounds, len(current))
    return QualitativeResult(winning=frozenset(current), witness={s: support[s] for s in game.states if s in current})


def reach_value_zero_set(game: ConcurrentGame, T: Iterable[str]) -> QualitativeResult:
    """States where player 1 cannot reach T with positive probability (player 2 wins safety surely)."""
    T = set(T)
    return almost_sure_safe_concurrent(game, PLAYER2, [s for s in game.states if s not in T])


def support_selector(
    game: ConcurrentGame, supports: SupportMap, player: int, default: Optional[Selector] = None
) -> Selector:
    """Uniform distribution over each recorded support; other states from `default` or uniform."""
    choice = {}
    for s in game.states:
        if s in supports:
            choice[s] = Distribution.uniform(supports[s], game.backend)
        elif default is not None:
            choice[s] = default[s]
        else:
            choice[s] = Distribution.uniform(game.available(player, s), game.backend)
    return Selector(player, choice)
