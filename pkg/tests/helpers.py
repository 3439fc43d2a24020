"""Seeded random game generators and brute-force oracles for the test suites."""

from fractions import Fraction
from itertools import combinations, product
from typing import Dict, Iterator, List

import networkx as nx
import numpy as np

from src.game_model import (
    OWNER_P1,
    OWNER_P2,
    OWNER_RANDOM,
    PLAYER1,
    PLAYER2,
    REACH,
    ConcurrentGame,
    Distribution,
    Mdp,
    Objective,
    Selector,
    TurnBasedGame,
    Valuation,
    fix_both,
    to_concurrent,
)
from src.mdp_solver import chain_reach
from src.numeric import NumericBackend


def _dyadic_dist(rng: np.random.Generator, states: List[str], backend: NumericBackend) -> Dict:
    size = min(int(rng.integers(1, 3)), len(states))
    picked = [states[i] for i in rng.choice(len(states), size=size, replace=False)]
    if size == 1:
        return {picked[0]: backend.one}
    q = int(rng.integers(1, 4))
    return {picked[0]: backend.convert(Fraction(q, 4)), picked[1]: backend.convert(Fraction(4 - q, 4))}


def random_concurrent_game(
    rng: np.random.Generator, backend: NumericBackend, max_states: int = 5, max_moves: int = 3
) -> ConcurrentGame:
    """Concurrent game with at most max_states states and quarter-valued probabilities."""
    n = int(rng.integers(2, max_states + 1))
    states = [f"s{i}" for i in range(n)]
    moves1, moves2, delta = {}, {}, {}
    for s in states:
        moves1[s] = tuple(f"a{i}" for i in range(int(rng.integers(1, max_moves + 1))))
        moves2[s] = tuple(f"b{j}" for j in range(int(rng.integers(1, max_moves + 1))))
        for a in moves1[s]:
            for b in moves2[s]:
                delta[(s, a, b)] = _dyadic_dist(rng, states, backend)
    return ConcurrentGame(states, moves1, moves2, delta, backend)


def random_turn_based_game(
    rng: np.random.Generator,
    backend: NumericBackend,
    max_states: int = 5,
    binary: bool = False,
    max_random: int = 4
) -> TurnBasedGame:
    """
    Turn-based game with at most two successors per state.

    With binary=True every random state has one successor or two at 1/2 each.
    """
    n = int(rng.integers(2, max_states + 1))
    states = [f"s{i}" for i in range(n)]
    owner, edges, dist = {}, {}, {}
    random_count = 0
    for s in states:
        tag = [OWNER_P1, OWNER_P2, OWNER_RANDOM][int(rng.integers(0, 3))]
        if tag == OWNER_RANDOM and random_count >= max_random:
            tag = OWNER_P1
        owner[s] = tag
        size = min(int(rng.integers(1, 3)), n)
        succ = [states[i] for i in rng.choice(n, size=size, replace=False)]
        edges[s] = tuple(succ)
        if tag == OWNER_RANDOM:
            random_count += 1
            if size == 1:
                dist[s] = {succ[0]: backend.one}
            elif binary:
                dist[s] = {t: backend.convert(Fraction(1, 2)) for t in succ}
            else:
                q = int(rng.integers(1, 4))
                dist[s] = {succ[0]: backend.convert(Fraction(q, 4)), succ[1]: backend.convert(Fraction(4 - q, 4))}
    return TurnBasedGame(states, owner, edges, dist, backend)


def random_matrix(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.random((rows, cols))


def random_subset(rng: np.random.Generator, states: List[str]) -> List[str]:
    """Nonempty proper subset when possible."""
    mask = rng.random(len(states)) < 0.5
    if not mask.any():
        mask[int(rng.integers(len(states)))] = True
    if mask.all() and len(states) > 1:
        mask[int(rng.integers(len(states)))] = False
    return [s for s, keep in zip(states, mask) if keep]


def random_selector(rng: np.random.Generator, game: ConcurrentGame, owner: int) -> Selector:
    """Uniform mix over a random nonempty move subset at every state."""
    choice = {}
    for s in game.states:
        moves = list(game.available(owner, s))
        if rng.random() < 0.7:
            moves = random_subset(rng, moves)
        choice[s] = Distribution.uniform(moves, game.backend)
    return Selector(owner, choice)


def random_valuation(rng: np.random.Generator, states: List[str], backend: NumericBackend) -> Valuation:
    """Quarter-valued valuation."""
    return Valuation({s: backend.convert(Fraction(int(rng.integers(0, 5)), 4)) for s in states})


def pure_selectors(game: ConcurrentGame, owner: int) -> Iterator[Selector]:
    for combo in product(*(game.available(owner, s) for s in game.states)):
        yield Selector.pure(game, owner, dict(zip(game.states, combo)))


def pure_strategies(game: TurnBasedGame, owner: str) -> Iterator[Dict[str, str]]:
    own = game.player_states(owner)
    for combo in product(*(game.edges[s] for s in own)):
        yield dict(zip(own, combo))


def brute_force_values(game: TurnBasedGame, objective: Objective) -> Valuation:
    """Statewise max-min over all pure memoryless strategy pairs."""
    backend = game.backend
    concurrent = to_concurrent(game)
    if objective.kind == REACH:
        target = set(objective.states)
    else:
        target = {s for s in game.states if s not in objective.states}
    best = {}
    for moves1 in pure_strategies(game, OWNER_P1):
        xi1 = Selector.pure(concurrent, PLAYER1, moves1)
        worst = {}
        for moves2 in pure_strategies(game, OWNER_P2):
            xi2 = Selector.pure(concurrent, PLAYER2, moves2)
            reach = chain_reach(fix_both(concurrent, xi1, xi2), target)
            values = reach if objective.kind == REACH else reach.complement(backend)
            for s in game.states:
                if s not in worst or values[s] < worst[s]:
                    worst[s] = values[s]
        for s in game.states:
            if s not in best or worst[s] > best[s]:
                best[s] = worst[s]
    return Valuation({s: best[s] for s in game.states})


def grid_matrix_value(M: np.ndarray, steps: int = 2000) -> float:
    """Value of a two-row matrix game by scanning the row player's mixing weight."""
    if M.shape[0] != 2:
        raise ValueError("grid search needs exactly two rows")
    weights = np.linspace(0.0, 1.0, steps + 1)
    guaranteed = np.min(np.outer(weights, M[0]) + np.outer(1 - weights, M[1]), axis=1)
    return float(guaranteed.max())


def brute_force_end_components(mdp: Mdp) -> List[frozenset]:
    """Maximal end components found by checking every state subset."""
    found = []
    states = list(mdp.states)
    for size in range(1, len(states) + 1):
        for subset in combinations(states, size):
            members = set(subset)
            graph = nx.DiGraph()
            graph.add_nodes_from(members)
            closed = True
            for s in members:
                kept = [a for a in mdp.actions(s) if set(mdp.action_dist(s, a).support) <= members]
                if not kept:
                    closed = False
                    break
                for a in kept:
                    graph.add_edges_from((s, t) for t in mdp.action_dist(s, a).support)
            if closed and nx.is_strongly_connected(graph):
                found.append(frozenset(members))
    return [c for c in found if not any(c < other for other in found)]
