"""
Strategy improvement for safety and reachability objectives.

The safety algorithm improves player 1's selector locally wherever the
one-step operator Pre_1 beats the current value, and otherwise looks for
states from which an almost-sure safe play exists in the turn-based
reduction restricted to optimal supports. Reachability improvement starts
from a proper selector and only uses the local step. Both are driven one
step at a time so they can be dovetailed.
"""

import logging
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Deque, Dict, FrozenSet, Iterable, Iterator, List, Optional, Set, Tuple

import pandas as pd

from src.errors import ImproperSelectorError, PreconditionError
from src.game_model import (
    AnyGame,
    ConcurrentGame,
    Distribution,
    Objective,
    OWNER_P1,
    OWNER_P2,
    OWNER_RANDOM,
    PLAYER1,
    PLAYER2,
    REACH,
    Selector,
    TurnBasedGame,
    Valuation,
    as_concurrent,
    check_selector,
    destinations,
    make_absorbing,
    swap_players,
)
from src.matrix_games import ENUMERATION_LIMIT, SupportPair, opt_sel_count, pre_one, pre_one_valuation
from src.mdp_solver import reach_value_of_selector, safety_value_of_selector
from src.numeric import NumericBackend, get_backend
from src.qualitative import (
    almost_sure_safe_concurrent,
    almost_sure_safe_tb,
    attractor_tb,
    reach_value_zero_set,
    support_selector,
)
from src.results import EPSILON, ITERATION_CAP, OPTIMAL, PRE_FIXPOINT, Certificate, SolveResult, format_valuation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Config:
    """
    Solver configuration.

    Attributes:
        epsilon: dovetail stops once v + u >= 1 - epsilon at every state
        tau_eq: comparison tolerance in float mode
        max_iters: cap on improvement steps
        backend: 'float' or 'rational'
        oracle_check: compare the result with value iteration
        non_local_step: run the turn-based reduction step when the local step stalls
        pi_min: smallest probability counted as "in the support" in float mode
        trace_limit: iterations kept in a trace (head and tail halves)
        threads: worker threads for per-state Pre_1 evaluation
        oracle_iters: value-iteration rounds for the oracle check
        enumeration_limit: largest |moves1| + |moves2| for support enumeration
    """

    epsilon: float = 1e-6
    tau_eq: float = 1e-9
    max_iters: int = 10000
    backend: str = "float"
    oracle_check: bool = False
    non_local_step: bool = True
    pi_min: float = 1e-9
    trace_limit: int = 1000
    threads: int = 1
    oracle_iters: int = 10000
    enumeration_limit: int = ENUMERATION_LIMIT

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be at least 1, got {self.max_iters}")
        if self.tau_eq < 0:
            raise ValueError(f"tau_eq must be nonnegative, got {self.tau_eq}")
        if self.backend not in ("float", "floating", "rational"):
            raise ValueError(f"Unknown backend: {self.backend}")
        if self.threads < 1:
            raise ValueError(f"threads must be at least 1, got {self.threads}")
        if self.trace_limit < 2:
            raise ValueError(f"trace_limit must be at least 2, got {self.trace_limit}")

    def make_backend(self) -> NumericBackend:
        return get_backend(self.backend, self.tau_eq, self.pi_min)


class StepKind(Enum):
    LOCAL_PRE = "local-Pre"
    TB_ALMOST_SURE = "tb-almost-sure"
    NONE = "none"


@dataclass(frozen=True)
class SiIteration:
    """Iteration i: the valuation of gamma_i and the step taken from it."""

    index: int
    values: Valuation
    selector: Selector
    kind: StepKind
    changed: Tuple[str, ...]


class SiTrace:
    """Iteration log; keeps the first and last trace_limit/2 entries of long runs."""

    def __init__(self, limit: int = 1000):
        self.limit = limit
        self.head: List[SiIteration] = []
        self.tail: Deque[SiIteration] = deque(maxlen=limit - limit // 2)
        self.total = 0
        self.certificate: Optional[Certificate] = None

    def record(self, entry: SiIteration) -> None:
        if len(self.head) < self.limit // 2:
            self.head.append(entry)
        else:
            self.tail.append(entry)
        self.total += 1

    @property
    def iterations(self) -> List[SiIteration]:
        return self.head + list(self.tail)

    @property
    def dropped(self) -> int:
        return self.total - len(self.head) - len(self.tail)

    @property
    def last(self) -> Optional[SiIteration]:
        if self.tail:
            return self.tail[-1]
        return self.head[-1] if self.head else None

    def to_dict(self, backend: NumericBackend) -> Dict:
        """Trace JSON document."""
        result = {
            "iterations": [
                {
                    "i": entry.index,
                    "kind": entry.kind.value,
                    "changed": list(entry.changed),
                    "v": format_valuation(entry.values, backend),
                }
                for entry in self.iterations
            ],
            "certificate": self.certificate.to_dict() if self.certificate else None,
        }
        if self.dropped:
            result["dropped"] = self.dropped
        return result

    def to_dataframe(self) -> pd.DataFrame:
        rows = [
            {
                "i": entry.index,
                "kind": entry.kind.value,
                "changed": ",".join(entry.changed),
                "min_value": float(min(entry.values.values())),
                "mean_value": float(sum(entry.values.values()) / len(entry.values)),
            }
            for entry in self.iterations
        ]
        return pd.DataFrame(rows, columns=["i", "kind", "changed", "min_value", "mean_value"])


@dataclass(frozen=True)
class TbReduction:
    """
    Turn-based game built from the optimal supports of a valuation.

    Attributes:
        game: the reduction; original states belong to player 1, (s,A,B) to
            player 2 and (s,A,b) are random states uniform over Dest(s,A,b)
        safe_set: F plus every reduction state derived from a state in F
        back_map: reduction state -> (original state, support pair or None, move b or None)
    """

    game: TurnBasedGame
    safe_set: FrozenSet[str]
    back_map: Dict[str, Tuple[str, Optional[SupportPair], Optional[str]]] = field(hash=False)


def _pair_id(s: str, A: Iterable[str], B: Iterable[str]) -> str:
    return f"({s},{{{','.join(A)}}},{{{','.join(B)}}})"


def _random_id(s: str, A: Iterable[str], b: str) -> str:
    return f"({s},{{{','.join(A)}}},{b})"


def tb_reduction(
    game: ConcurrentGame, v: Valuation, F: Iterable[str], limit: int = ENUMERATION_LIMIT
) -> TbReduction:
    """
    Build the turn-based reduction of a concurrent game for valuation v.

    Args:
        game: concurrent game
        v: current valuation
        F: safe set of the original game
        limit: support enumeration guard

    Returns:
        TbReduction
    """
    backend = game.backend
    F = set(F)
    known = set(game.states)
    states: List[str] = list(game.states)
    owner: Dict[str, str] = {s: OWNER_P1 for s in game.states}
    edges: Dict[str, Tuple[str, ...]] = {}
    dist: Dict[str, Distribution] = {}
    back_map: Dict[str, Tuple[str, Optional[SupportPair], Optional[str]]] = {s: (s, None, None) for s in game.states}
    safe: Set[str] = set(F)

    def add_state(name: str, tag: str, origin: Tuple[str, Optional[SupportPair], Optional[str]]) -> None:
        if name in known:
            raise ValueError(f"reduction state {name} clashes with a game state")
        known.add(name)
        states.append(name)
        owner[name] = tag
        back_map[name] = origin
        if origin[0] in F:
            safe.add(name)

    for s in game.states:
        successors = []
        for pair in opt_sel_count(game, v, s, limit):
            pid = _pair_id(s, pair.A, pair.B)
            add_state(pid, OWNER_P2, (s, pair, None))
            successors.append(pid)
            branches = []
            for b in pair.B:
                rid = _random_id(s, pair.A, b)
                if rid not in owner:
                    add_state(rid, OWNER_RANDOM, (s, pair, b))
                    reached = destinations(game, s, pair.A, b)
                    targets = tuple(t for t in game.states if t in reached)
                    edges[rid] = targets
                    dist[rid] = Distribution.uniform(targets, backend)
                branches.append(rid)
            edges[pid] = tuple(branches)
        edges[s] = tuple(successors)
    reduction = TurnBasedGame(states, owner, edges, dist, backend)
    return TbReduction(game=reduction, safe_set=frozenset(safe), back_map=back_map)


def safety_improve_step(
    game: ConcurrentGame,
    F: Iterable[str],
    gamma: Selector,
    v: Valuation,
    w1: Optional[Iterable[str]] = None,
    non_local_step: bool = True,
    check: bool = False,
    limit: int = ENUMERATION_LIMIT,
    threads: int = 1
) -> Tuple[Selector, StepKind, Tuple[str, ...]]:
    """
    One improvement step of the safety algorithm.

    Args:
        game: concurrent game whose W1 and unsafe states are absorbing
        F: safe set
        gamma: current player-1 selector
        v: value of gamma, safety_value_of_selector(game, gamma, F)
        w1: almost-sure safe set, recomputed when omitted
        non_local_step: allow the turn-based reduction step
        check: recompute the value of gamma and compare with v
        limit: support enumeration guard
        threads: worker threads for the local step

    Returns:
        Tuple of (next selector, step kind, changed states)
    """
    backend = game.backend
    F = set(F)
    if w1 is None:
        w1 = almost_sure_safe_concurrent(game, PLAYER1, F).winning
    w1 = set(w1)
    if check:
        actual = safety_value_of_selector(game, gamma, F)
        bad = [s for s in game.states if not backend.eq(actual[s], v[s])]
        if bad:
            raise PreconditionError(f"valuation does not match the selector at {bad}")

    frozen = w1 | {s for s in game.states if s not in F}
    candidates = [s for s in game.states if s not in frozen]
    pre = pre_one_valuation(game, v, threads) if threads > 1 else None
    improved: List[str] = []
    updates: Dict[str, Distribution] = {}
    for s in candidates:
        value = pre[s] if pre is not None else None
        if value is None or backend.gt(value, v[s]):
            value, move = pre_one(game, v, s)
            if backend.gt(value, v[s]):
                improved.append(s)
                updates[s] = move
    if improved:
        return gamma.updated(updates), StepKind.LOCAL_PRE, tuple(improved)
    if not non_local_step:
        return gamma, StepKind.NONE, ()

    reduction = tb_reduction(game, v, F, limit)
    almost_sure = almost_sure_safe_tb(reduction.game, PLAYER1, reduction.safe_set)
    U = [s for s in candidates if s in almost_sure.winning]
    for s in U:
        chosen = almost_sure.witness[s].support[0]
        _, pair, _ = reduction.back_map[chosen]
        updates[s] = pair.witness
    if not any(updates[s] != gamma[s] for s in U):
        return gamma, StepKind.NONE, ()
    return gamma.updated(updates), StepKind.TB_ALMOST_SURE, tuple(U)


def _restrict_selector(game: ConcurrentGame, selector: Selector, absorbed: Set[str]) -> Selector:
    """Point choices on absorbed states, the given choices elsewhere."""
    choice = {}
    for s in game.states:
        if s in absorbed:
            choice[s] = Distribution.point(game.available(selector.owner, s)[0], game.backend)
        else:
            choice[s] = selector[s].converted(game.backend)
    restricted = Selector(selector.owner, choice)
    check_selector(game, restricted)
    return restricted


class SafetyImprovement:
    """Stepwise run of the safety strategy-improvement algorithm."""

    def __init__(self, game: AnyGame, F: Iterable[str], config: Config, initial: Optional[Selector] = None):
        """
        Initialize the run: compute W1, absorb W1 and the unsafe states, evaluate gamma_0.

        Args:
            game: concurrent or turn-based game
            F: safe set
            config: solver configuration
            initial: starting selector (uniform when omitted)
        """
        self.config = config
        self.backend = config.make_backend()
        self.original = as_concurrent(game.with_backend(self.backend))
        self.F = set(F)
        unknown = self.F - set(self.original.states)
        if unknown:
            raise ValueError(f"Unknown states in safe set: {sorted(unknown)}")
        self.w1_result = almost_sure_safe_concurrent(self.original, PLAYER1, self.F)
        self.w1 = set(self.w1_result.winning)
        self.unsafe = {s for s in self.original.states if s not in self.F}
        self.game = make_absorbing(self.original, self.w1 | self.unsafe)
        if initial is None:
            self.gamma = Selector.uniform(self.game, PLAYER1)
        else:
            self.gamma = _restrict_selector(self.game, initial, self.w1 | self.unsafe)
        self.values = safety_value_of_selector(self.game, self.gamma, self.F)
        self.index = 0
        self.finished = False
        self.trace = SiTrace(config.trace_limit)
        logger.info(
            "safety improvement: %d states, |F| = %d, |W1| = %d",
            len(self.original.states), len(self.F), len(self.w1)
        )

    def step(self) -> StepKind:
        """Perform one improvement step; returns StepKind.NONE once no step applies."""
        if self.finished:
            return StepKind.NONE
        gamma, kind, changed = safety_improve_step(
            self.game, self.F, self.gamma, self.values,
            w1=self.w1,
            non_local_step=self.config.non_local_step,
            limit=self.config.enumeration_limit,
            threads=self.config.threads
        )
        new_values = None
        if kind is not StepKind.NONE:
            new_values = safety_value_of_selector(self.game, gamma, self.F)
            if not self.backend.exact and not any(
                self.backend.gt(new_values[s], self.values[s]) for s in self.game.states
            ):
                logger.debug("iteration %d: no improvement beyond tau_eq, stopping", self.index)
                gamma, kind, changed, new_values = self.gamma, StepKind.NONE, (), None
        self.trace.record(SiIteration(self.index, self.values, self.gamma, kind, changed))
        logger.debug("safety iteration %d: %s %s", self.index, kind.value, list(changed))
        if kind is StepKind.NONE:
            self.finished = True
            return kind
        self.gamma, self.values = gamma, new_values
        self.index += 1
        return kind

    def strategy(self) -> Selector:
        """Witness on the original game: almost-sure support on W1, gamma elsewhere."""
        fallback = Selector(PLAYER1, {
            s: Distribution.uniform(self.original.moves1[s], self.backend) if s in self.unsafe else self.gamma[s]
            for s in self.original.states
        })
        return support_selector(self.original, self.w1_result.witness, PLAYER1, default=fallback)


class ReachImprovement:
    """Stepwise run of the reachability strategy-improvement algorithm for one player."""

    def __init__(
        self,
        game: AnyGame,
        T: Iterable[str],
        config: Config,
        player: int = PLAYER1,
        initial: Optional[Selector] = None
    ):
        """
        Initialize the run: compute W2, absorb T and W2, pick a proper gamma_0.

        Args:
            game: concurrent or turn-based game
            T: target set
            config: solver configuration
            player: the reaching player; player 2 is solved on the swapped game
            initial: starting selector; must be proper
        """
        self.config = config
        self.backend = config.make_backend()
        self.player = player
        source = game.with_backend(self.backend)
        concurrent = as_concurrent(source)
        if player == PLAYER2:
            concurrent = swap_players(concurrent)
        self.T = set(T)
        unknown = self.T - set(concurrent.states)
        if unknown:
            raise ValueError(f"Unknown states in target set: {sorted(unknown)}")
        self.w2 = set(reach_value_zero_set(concurrent, self.T).winning)
        # Only targets count as value-1 states
        self.w1 = set(self.T)
        self.goal = self.T | self.w2
        self.game = make_absorbing(concurrent, self.goal)
        if initial is not None:
            self.gamma = _restrict_selector(self.game, initial, self.goal)
        elif isinstance(source, TurnBasedGame):
            self.gamma = self._attractor_selector(source)
        else:
            self.gamma = Selector.uniform(self.game, PLAYER1)
        self.index = 0
        self.values = self._evaluate(self.gamma)
        self.finished = False
        self.trace = SiTrace(config.trace_limit)
        logger.info(
            "reachability improvement (player %d): %d states, |T| = %d, |W2| = %d",
            player, len(concurrent.states), len(self.T), len(self.w2)
        )

    def _attractor_selector(self, source: TurnBasedGame) -> Selector:
        """Pure selector moving along the attractor layers towards T and W2."""
        attractor, pure = attractor_tb(source, self.player, self.goal)
        choice = {}
        for s in self.game.states:
            if s in pure.choice and s not in self.goal:
                choice[s] = pure[s]
            elif len(self.game.moves1[s]) == 1:
                choice[s] = Distribution.point(self.game.moves1[s][0], self.backend)
            else:
                logger.warning("state %s outside the attractor; playing uniformly", s)
                choice[s] = Distribution.uniform(self.game.moves1[s], self.backend)
        return Selector(PLAYER1, choice)

    def _evaluate(self, gamma: Selector) -> Valuation:
        try:
            return reach_value_of_selector(self.game, gamma, self.T, self.w2)
        except ImproperSelectorError as exc:
            raise ImproperSelectorError(exc.component, iteration=self.index)

    def step(self) -> StepKind:
        """Improve at every state where Pre_1 beats the current value."""
        if self.finished:
            return StepKind.NONE
        improved: List[str] = []
        updates: Dict[str, Distribution] = {}
        for s in self.game.states:
            if s in self.goal:
                continue
            value, move = pre_one(self.game, self.values, s)
            if self.backend.gt(value, self.values[s]):
                improved.append(s)
                updates[s] = move
        kind = StepKind.LOCAL_PRE if improved else StepKind.NONE
        new_values = None
        gamma = self.gamma
        if improved:
            gamma = self.gamma.updated(updates)
            new_values = self._evaluate(gamma)
            if not self.backend.exact and not any(
                self.backend.gt(new_values[s], self.values[s]) for s in self.game.states
            ):
                kind, improved, gamma = StepKind.NONE, [], self.gamma
        self.trace.record(SiIteration(self.index, self.values, self.gamma, kind, tuple(improved)))
        logger.debug("reach iteration %d: %s %s", self.index, kind.value, improved)
        if kind is StepKind.NONE:
            self.finished = True
            return kind
        self.gamma, self.values = gamma, new_values
        self.index += 1
        return kind


def _run(improver, config: Config) -> Certificate:
    for _ in range(config.max_iters):
        if improver.step() is StepKind.NONE:
            return Certificate(OPTIMAL)
    return Certificate(ITERATION_CAP)


def solve_safety_si(
    game: AnyGame, F: Iterable[str], config: Optional[Config] = None, initial: Optional[Selector] = None
) -> SolveResult:
    """
    Safety strategy improvement for player 1's objective Safe(F).

    Returns:
        SolveResult whose certificate is optimal, pre-fixpoint (local step
        only) or iteration-cap
    """
    config = config or Config()
    run = SafetyImprovement(game, F, config, initial)
    certificate = _run(run, config)
    if certificate.kind == OPTIMAL and not config.non_local_step:
        certificate = Certificate(PRE_FIXPOINT)
    run.trace.certificate = certificate
    logger.info("safety improvement finished: %s after %d iterations", certificate.kind, run.index)
    return SolveResult(
        values=run.values,
        strategy=run.strategy(),
        certificate=certificate,
        backend=run.backend,
        trace=run.trace,
    )


def solve_reach_si(
    game: AnyGame,
    T: Iterable[str],
    config: Optional[Config] = None,
    player: int = PLAYER1,
    initial: Optional[Selector] = None
) -> SolveResult:
    """
    Reachability strategy improvement for Reach(T).

    Args:
        game: concurrent or turn-based game
        T: target set
        config: solver configuration
        player: reaching player (1 or 2)
        initial: proper starting selector (uniform or attractor when omitted)

    Returns:
        SolveResult for the reaching player
    """
    config = config or Config()
    run = ReachImprovement(game, T, config, player, initial)
    certificate = _run(run, config)
    run.trace.certificate = certificate
    logger.info("reachability improvement finished: %s after %d iterations", certificate.kind, run.index)
    return SolveResult(
        values=run.values,
        strategy=run.gamma,
        certificate=certificate,
        backend=run.backend,
        trace=run.trace,
        notes=["value-1 set for reachability taken as the target states only"],
    )


def iterate_values(game: AnyGame, objective: Objective, threads: int = 1) -> Iterator[Valuation]:
    """
    Value-iteration sequence u_0, u_1, ...

    Reach: u_0 = [T], u_{k+1} = max([T], Pre_1(u_k)), nondecreasing.
    Safe: v_0 = [F], v_{k+1} = min([F], Pre_1(v_k)), nonincreasing.
    """
    g = as_concurrent(game)
    backend = g.backend
    marked = set(objective.states)
    v = Valuation.indicator(g.states, marked, backend)
    while True:
        yield v
        w = pre_one_valuation(g, v, threads)
        if objective.kind == REACH:
            v = Valuation({s: backend.one if s in marked else w[s] for s in g.states})
        else:
            v = Valuation({s: w[s] if s in marked else backend.zero for s in g.states})


def value_iteration(
    game: AnyGame, objective: Objective, iters: int, tolerance: Optional[float] = None, threads: int = 1
) -> Valuation:
    """
    Run value iteration for a fixed number of rounds.

    Args:
        game: game (its backend is used)
        objective: Safe(F) or Reach(T)
        iters: number of rounds
        tolerance: stop early once the largest change is at most this

    Returns:
        The valuation after the last round
    """
    if iters < 0:
        raise ValueError(f"iters must be nonnegative, got {iters}")
    sequence = iterate_values(game, objective, threads)
    v = next(sequence)
    for _ in range(iters):
        nxt = next(sequence)
        change = max(abs(nxt[s] - v[s]) for s in v)
        v = nxt
        if tolerance is not None and change <= tolerance:
            break
    return v


def solve_dovetail(game: AnyGame, F: Iterable[str], config: Optional[Config] = None) -> SolveResult:
    """
    Interleave safety improvement for player 1 with reachability improvement for player 2.

    One step per side per round, safety first. Stops as optimal when either
    side reaches its fixpoint, or with an epsilon certificate once
    v(s) + u(s) >= 1 - epsilon at every state.

    Returns:
        SolveResult with values = v (lower bound for Safe(F)) and
        opponent_values = u (lower bound for player 2's Reach(S \\ F))
    """
    config = replace(config or Config(), non_local_step=True)
    safety = SafetyImprovement(game, F, config)
    backend = safety.backend
    unsafe = [s for s in safety.original.states if s not in safety.F]
    reach = ReachImprovement(game, unsafe, config, player=PLAYER2)
    certificate = Certificate(ITERATION_CAP)
    v, u = safety.values, reach.values
    for _ in range(config.max_iters):
        if safety.step() is StepKind.NONE:
            v = safety.values
            u = v.complement(backend)
            certificate = Certificate(OPTIMAL)
            break
        if reach.step() is StepKind.NONE:
            u = reach.values
            v = u.complement(backend)
            certificate = Certificate(OPTIMAL)
            break
        v, u = safety.values, reach.values
        gap = min(v[s] + u[s] for s in v)
        if backend.ge(gap, backend.one - backend.convert(config.epsilon)):
            certificate = Certificate(EPSILON, config.epsilon)
            break
    violations = [s for s in v if backend.gt(v[s] + u[s], backend.one)]
    if violations:
        logger.warning("dovetail bounds cross at %s", violations)
    safety.trace.certificate = certificate
    logger.info("dovetail finished: %s after %d safety steps", certificate.kind, safety.index)
    return SolveResult(
        values=v,
        strategy=safety.strategy(),
        certificate=certificate,
        backend=backend,
        trace=safety.trace,
        opponent_values=u,
    )
