"""Quantitative analysis of Markov chains and MDPs."""

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

import networkx as nx
import numpy as np

from src.errors import GameSolverError, ImproperSelectorError, LpError
from src.game_model import (
    ConcurrentGame,
    Distribution,
    MarkovChain,
    Mdp,
    Selector,
    Valuation,
    fix_selector,
)
from src.numeric import NumericBackend, Number
from src.simplex import GE, LE, Infeasible, PivotLimit, Unbounded, maximize

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EndComponent:
    """
    Closed, strongly connected sub-MDP.

    Attributes:
        states: the state set C
        actions: state -> actions whose successors all stay in C
    """

    states: FrozenSet[str]
    actions: Tuple[Tuple[str, Tuple[str, ...]], ...]

    def action_map(self) -> Dict[str, Tuple[str, ...]]:
        return dict(self.actions)


def backward_reachable(edges: Mapping[str, Iterable[str]], states: Iterable[str], targets: Iterable[str]) -> Set[str]:
    """States with a path to some target (targets included)."""
    graph = nx.DiGraph()
    graph.add_nodes_from(states)
    for s, succ in edges.items():
        graph.add_edges_from((s, t) for t in succ)
    result = set(targets)
    for t in list(result):
        if t in graph:
            result |= nx.ancestors(graph, t)
    return result


def _clip(x: Number, backend: NumericBackend) -> Number:
    if backend.exact:
        return x
    return min(1.0, max(0.0, backend.clean(x)))


def _solve_reach_system(
    rows: Mapping[str, Distribution], maybe: List[str], targets: Set[str], backend: NumericBackend
) -> Dict[str, Number]:
    """Solve x(s) = sum_t p(s,t) x(t) on `maybe`, x = 1 on targets, 0 elsewhere."""
    position = {s: i for i, s in enumerate(maybe)}
    n = len(maybe)
    matrix = [[backend.zero] * n for _ in range(n)]
    rhs = [backend.zero] * n
    for s in maybe:
        i = position[s]
        matrix[i][i] += backend.one
        for t, p in rows[s].items():
            if t in position:
                matrix[i][position[t]] -= p
            elif t in targets:
                rhs[i] += p
    try:
        solution = backend.solve_linear(matrix, rhs)
    except np.linalg.LinAlgError:
        raise GameSolverError("singular reachability system after pruning")
    return {s: _clip(x, backend) for s, x in zip(maybe, solution)}


def chain_reach(chain: MarkovChain, T: Iterable[str]) -> Valuation:
    """
    Probability of reaching T from every state of a Markov chain.

    States that cannot reach T get 0; the remaining linear system is
    solved exactly in rational mode.
    """
    backend = chain.backend
    targets = set(T) & set(chain.states)
    edges = {s: chain[s].support for s in chain.states}
    can_reach = backward_reachable(edges, chain.states, targets)
    maybe = [s for s in chain.states if s in can_reach and s not in targets]
    solved = _solve_reach_system(chain.rows, maybe, targets, backend)
    values = {}
    for s in chain.states:
        if s in targets:
            values[s] = backend.one
        else:
            values[s] = solved.get(s, backend.zero)
    return Valuation(values)


def _q_value(dist: Distribution, x: Mapping[str, Number]) -> Number:
    return sum(p * x[t] for t, p in dist.items())


def _attractor_policy(mdp: Mdp, targets: Set[str], maybe: List[str]) -> Dict[str, str]:
    """Actions moving each maybe-state one layer closer to the targets."""
    policy: Dict[str, str] = {}
    reached = set(targets)
    remaining = list(maybe)
    while remaining:
        layer = []
        for s in remaining:
            for a in mdp.actions(s):
                if any(t in reached for t in mdp.action_dist(s, a).support):
                    policy[s] = a
                    layer.append(s)
                    break
        if not layer:
            raise GameSolverError(f"states {remaining} cannot reach the target set")
        reached.update(layer)
        remaining = [s for s in remaining if s not in policy]
    return policy


def _policy_iteration(mdp: Mdp, targets: Set[str], maybe: List[str]) -> Tuple[Dict[str, Number], Dict[str, str]]:
    backend = mdp.backend
    policy = _attractor_policy(mdp, targets, maybe)
    while True:
        rows = {s: mdp.action_dist(s, policy[s]) for s in maybe}
        solved = _solve_reach_system(rows, maybe, targets, backend)
        x = {s: backend.zero for s in mdp.states}
        x.update({t: backend.one for t in targets})
        x.update(solved)
        changed = False
        for s in maybe:
            current = _q_value(mdp.action_dist(s, policy[s]), x)
            best_action, best = policy[s], current
            for a in mdp.actions(s):
                q = _q_value(mdp.action_dist(s, a), x)
                if backend.gt(q, best):
                    best_action, best = a, q
            if best_action != policy[s]:
                policy[s] = best_action
                changed = True
        if not changed:
            return x, policy


def _linear_program(mdp: Mdp, targets: Set[str], maybe: List[str]) -> Dict[str, Number]:
    """minimise sum x subject to x(s) >= sum_t x(t) delta(s,a)(t), x = 1 on T, x <= 1."""
    backend = mdp.backend
    position = {s: i for i, s in enumerate(maybe)}
    n = len(maybe)
    rows, senses, rhs = [], [], []
    for s in maybe:
        for a in mdp.actions(s):
            row = [backend.zero] * n
            row[position[s]] += backend.one
            bound = backend.zero
            for t, p in mdp.action_dist(s, a).items():
                if t in position:
                    row[position[t]] -= p
                elif t in targets:
                    bound += p
            rows.append(row)
            senses.append(GE)
            rhs.append(bound)
        upper = [backend.zero] * n
        upper[position[s]] = backend.one
        rows.append(upper)
        senses.append(LE)
        rhs.append(backend.one)
    try:
        solution = maximize([-backend.one] * n, rows, senses, rhs, backend)
    except (Infeasible, Unbounded, PivotLimit) as exc:
        raise LpError(f"reachability LP failed: {exc}")
    x = {s: backend.zero for s in mdp.states}
    x.update({t: backend.one for t in targets})
    x.update({s: _clip(solution.x[position[s]], backend) for s in maybe})
    return x


def _witness_from_values(mdp: Mdp, x: Mapping[str, Number], targets: Set[str], maybe: List[str]) -> Dict[str, str]:
    """
    Pure selector attaining x: among value-preserving actions pick one that
    moves towards a state already known to reach the targets.
    """
    backend = mdp.backend
    policy: Dict[str, str] = {}
    reached = set(targets)
    remaining = [s for s in maybe if x[s] > 0]
    tight = {
        s: [a for a in mdp.actions(s) if backend.eq(_q_value(mdp.action_dist(s, a), x), x[s])]
        for s in remaining
    }
    while remaining:
        layer = []
        for s in remaining:
            for a in tight[s]:
                if any(t in reached for t in mdp.action_dist(s, a).support):
                    policy[s] = a
                    layer.append(s)
                    break
        if not layer:
            break
        reached.update(layer)
        remaining = [s for s in remaining if s not in policy]
    for s in remaining:
        logger.debug("no value-preserving progress action at %s; using best action", s)
        policy[s] = max(mdp.actions(s), key=lambda a: _q_value(mdp.action_dist(s, a), x))
    return policy


def mdp_reach_value(mdp: Mdp, T: Iterable[str], avoid: Iterable[str] = ()) -> Tuple[Valuation, Selector]:
    """
    Maximal probability that the MDP's decision player reaches T.

    Args:
        mdp: the MDP
        T: target states
        avoid: states treated as losing sinks (value pinned to 0)

    Returns:
        Tuple of (values, pure witness selector for mdp.player)
    """
    backend = mdp.backend
    targets = set(T) & set(mdp.states)
    sinks = set(avoid) - targets
    edges = {
        s: [t for a in mdp.actions(s) for t in mdp.action_dist(s, a).support]
        for s in mdp.states if s not in sinks
    }
    can_reach = backward_reachable(edges, mdp.states, targets)
    maybe = [s for s in mdp.states if s in can_reach and s not in targets and s not in sinks]

    if not maybe:
        x = {s: backend.one if s in targets else backend.zero for s in mdp.states}
        policy: Dict[str, str] = {}
    elif backend.exact:
        x, policy = _policy_iteration(mdp, targets, maybe)
    else:
        x = _linear_program(mdp, targets, maybe)
        policy = _witness_from_values(mdp, x, targets, maybe)

    choice = {}
    for s in mdp.states:
        action = policy.get(s, mdp.actions(s)[0])
        choice[s] = Distribution.point(action, backend)
    return Valuation({s: x[s] for s in mdp.states}), Selector(mdp.player, choice)


def max_end_components(mdp: Mdp, within: Optional[Iterable[str]] = None) -> List[EndComponent]:
    """
    Maximal end components by iterated SCC decomposition with action pruning.

    Args:
        mdp: the MDP
        within: restrict to end components inside this state set

    Returns:
        Pairwise disjoint maximal end components, ordered by first state
    """
    candidates = set(mdp.states if within is None else within) & set(mdp.states)
    allowed: Dict[str, List[str]] = {s: list(mdp.actions(s)) for s in candidates}
    component_of: Dict[str, int] = {}
    while True:
        changed = False
        graph = nx.DiGraph()
        graph.add_nodes_from(candidates)
        for s in candidates:
            for a in allowed[s]:
                graph.add_edges_from((s, t) for t in mdp.action_dist(s, a).support)
        component_of = {}
        for k, component in enumerate(nx.strongly_connected_components(graph.subgraph(candidates))):
            for s in component:
                component_of[s] = k
        for s in list(candidates):
            kept = [
                a for a in allowed[s]
                if all(component_of.get(t) == component_of[s] for t in mdp.action_dist(s, a).support)
            ]
            if len(kept) != len(allowed[s]):
                allowed[s] = kept
                changed = True
            if not kept:
                candidates.discard(s)
                changed = True
        if not changed:
            break

    groups: Dict[int, List[str]] = {}
    for s in mdp.states:
        if s in candidates:
            groups.setdefault(component_of[s], []).append(s)
    return [
        EndComponent(
            states=frozenset(members),
            actions=tuple((s, tuple(allowed[s])) for s in members)
        )
        for members in groups.values()
    ]


def improper_component(game: ConcurrentGame, xi1: Selector, goal: Iterable[str]) -> Optional[EndComponent]:
    """An end component of the player-2 MDP that avoids goal, or None."""
    goal = set(goal)
    mdp = fix_selector(game, xi1)
    outside = [s for s in game.states if s not in goal]
    components = max_end_components(mdp, within=outside)
    return components[0] if components else None


def is_proper(game: ConcurrentGame, xi1: Selector, goal: Iterable[str]) -> bool:
    """True iff every player-2 strategy reaches goal with probability 1 against xi1."""
    return improper_component(game, xi1, goal) is None


def safety_value_of_selector(game: ConcurrentGame, gamma: Selector, F: Iterable[str]) -> Valuation:
    """Probability of staying in F forever when player 1 plays gamma and player 2 is optimal."""
    F = set(F)
    mdp = fix_selector(game, gamma)
    unsafe = [s for s in game.states if s not in F]
    reach, _ = mdp_reach_value(mdp, unsafe)
    return reach.complement(game.backend)


def reach_value_of_selector(
    game: ConcurrentGame, xi1: Selector, T: Iterable[str], W2: Iterable[str]
) -> Valuation:
    """
    Probability of reaching T when player 1 plays a proper selector xi1.

    Raises:
        ImproperSelectorError: some end component avoids T and W2
    """
    T, W2 = set(T), set(W2)
    component = improper_component(game, xi1, T | W2)
    if component is not None:
        raise ImproperSelectorError(component)
    mdp = fix_selector(game, xi1)
    reach, _ = mdp_reach_value(mdp, W2, avoid=T)
    return reach.complement(game.backend)
