"""
Game graphs, valuations and selectors.

Concurrent games are the working representation: turn-based games are
converted with `to_concurrent` before any quantitative analysis. Every
container here is treated as immutable after construction; operations
return new objects.
"""

from collections.abc import Mapping
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set, Tuple, Union

from src.errors import InvalidSelectorError
from src.numeric import FloatBackend, NumericBackend, Number

PLAYER1 = 1
PLAYER2 = 2

# Move used for the player without a choice at a state
DUMMY_MOVE = "_"

OWNER_P1 = "p1"
OWNER_P2 = "p2"
OWNER_RANDOM = "random"
OWNERS = (OWNER_P1, OWNER_P2, OWNER_RANDOM)

SAFE = "safe"
REACH = "reach"

# Round-off accepted outside [0, 1] in float valuations
VALUE_SLACK = 1e-9


def other(player: int) -> int:
    return PLAYER2 if player == PLAYER1 else PLAYER1


class Distribution(Mapping):
    """Probability distribution over identifiers (states or moves). Zero entries are dropped."""

    def __init__(self, entries: Mapping):
        self._entries: Dict[str, Number] = {k: p for k, p in entries.items() if p != 0}

    @classmethod
    def point(cls, item: str, backend: NumericBackend) -> "Distribution":
        return cls({item: backend.one})

    @classmethod
    def uniform(cls, items: Sequence[str], backend: NumericBackend) -> "Distribution":
        items = list(dict.fromkeys(items))
        if not items:
            raise ValueError("uniform distribution over an empty set")
        weight = backend.one / backend.convert(len(items))
        return cls({item: weight for item in items})

    @classmethod
    def mix(cls, weighted: Iterable[Tuple[Number, "Distribution"]], backend: NumericBackend) -> "Distribution":
        """Convex combination sum_i w_i * d_i."""
        acc: Dict[str, Number] = {}
        for weight, dist in weighted:
            if weight == 0:
                continue
            for item, p in dist.items():
                acc[item] = acc.get(item, backend.zero) + weight * p
        return cls({item: backend.clean(p) for item, p in acc.items()})

    def __getitem__(self, key: str) -> Number:
        return self._entries[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def prob(self, key: str) -> Number:
        return self._entries.get(key, 0)

    @property
    def support(self) -> Tuple[str, ...]:
        return tuple(k for k, p in self._entries.items() if p > 0)

    def total(self) -> Number:
        return sum(self._entries.values())

    def is_point(self) -> bool:
        return len(self.support) == 1

    def expectation(self, v: Mapping) -> Number:
        return sum(p * v[t] for t, p in self._entries.items())

    def converted(self, backend: NumericBackend) -> "Distribution":
        return Distribution({k: backend.convert(p) for k, p in self._entries.items()})

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}: {p}" for k, p in self._entries.items())
        return f"Distribution({{{inner}}})"


class Valuation(Mapping):
    """Map from states to values in [0, 1]; iteration order is state order."""

    def __init__(self, values: Mapping):
        self._values: Dict[str, Number] = dict(values)
        for s, x in self._values.items():
            if x < -VALUE_SLACK or x > 1 + VALUE_SLACK:
                raise ValueError(f"Value of {s} is {x}, outside [0, 1]")

    @classmethod
    def indicator(cls, states: Sequence[str], subset: Iterable[str], backend: NumericBackend) -> "Valuation":
        subset = set(subset)
        return cls({s: backend.one if s in subset else backend.zero for s in states})

    @classmethod
    def constant(cls, states: Sequence[str], c: Number) -> "Valuation":
        return cls({s: c for s in states})

    def __getitem__(self, state: str) -> Number:
        return self._values[state]

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def complement(self, backend: NumericBackend) -> "Valuation":
        return Valuation({s: backend.one - x for s, x in self._values.items()})

    def updated(self, changes: Mapping) -> "Valuation":
        values = dict(self._values)
        values.update(changes)
        return Valuation(values)

    def __repr__(self) -> str:
        return f"Valuation({self._values})"


class Selector:
    """Memoryless randomized choice of one player: a distribution over moves per state."""

    def __init__(self, owner: int, choice: Mapping):
        if owner not in (PLAYER1, PLAYER2):
            raise ValueError(f"Invalid selector owner: {owner}")
        self.owner = owner
        self.choice: Dict[str, Distribution] = dict(choice)

    @classmethod
    def uniform(cls, game: "ConcurrentGame", owner: int) -> "Selector":
        backend = game.backend
        return cls(owner, {s: Distribution.uniform(game.available(owner, s), backend) for s in game.states})

    @classmethod
    def pure(cls, game: "ConcurrentGame", owner: int, moves: Mapping) -> "Selector":
        """Point selector; states missing from `moves` play their first move."""
        backend = game.backend
        return cls(owner, {
            s: Distribution.point(moves.get(s, game.available(owner, s)[0]), backend)
            for s in game.states
        })

    def __getitem__(self, state: str) -> Distribution:
        try:
            return self.choice[state]
        except KeyError:
            raise InvalidSelectorError(f"selector for player {self.owner} has no entry for state {state}")

    def support(self, state: str) -> Tuple[str, ...]:
        return self[state].support

    def is_pure(self) -> bool:
        return all(d.is_point() for d in self.choice.values())

    def updated(self, changes: Mapping) -> "Selector":
        choice = dict(self.choice)
        choice.update(changes)
        return Selector(self.owner, choice)

    def __eq__(self, other) -> bool:
        return isinstance(other, Selector) and self.owner == other.owner and self.choice == other.choice

    def __repr__(self) -> str:
        return f"Selector(owner={self.owner}, choice={self.choice})"


@dataclass(frozen=True)
class Objective:
    """Safe(F) or Reach(T)."""

    kind: str
    states: FrozenSet[str]

    def __post_init__(self):
        if self.kind not in (SAFE, REACH):
            raise ValueError(f"Invalid objective kind: {self.kind}")
        object.__setattr__(self, "states", frozenset(self.states))

    def complement(self, all_states: Iterable[str]) -> "Objective":
        kind = REACH if self.kind == SAFE else SAFE
        return Objective(kind, frozenset(all_states) - self.states)


class ConcurrentGame:
    """
    Concurrent stochastic game graph.

    Attributes:
        states: ordered state identifiers
        moves1, moves2: per-state move tuples for player 1 and player 2
        delta: (state, move1, move2) -> Distribution over states
        backend: numeric backend the probabilities are expressed in
    """

    def __init__(
        self,
        states: Sequence[str],
        moves1: Mapping,
        moves2: Mapping,
        delta: Mapping,
        backend: Optional[NumericBackend] = None
    ):
        self.backend = backend or FloatBackend()
        self.states: Tuple[str, ...] = tuple(states)
        self.moves1: Dict[str, Tuple[str, ...]] = {s: tuple(m) for s, m in moves1.items()}
        self.moves2: Dict[str, Tuple[str, ...]] = {s: tuple(m) for s, m in moves2.items()}
        self.delta: Dict[Tuple[str, str, str], Distribution] = {
            key: Distribution({t: self.backend.convert(p) for t, p in dist.items()})
            for key, dist in delta.items()
        }
        self.index: Dict[str, int] = {s: i for i, s in enumerate(self.states)}

    @property
    def moves(self) -> Tuple[str, ...]:
        """Global move alphabet in first-seen order."""
        seen: Dict[str, None] = {}
        for s in self.states:
            for m in self.moves1.get(s, ()) + self.moves2.get(s, ()):
                seen.setdefault(m, None)
        return tuple(seen)

    def available(self, player: int, state: str) -> Tuple[str, ...]:
        table = self.moves1 if player == PLAYER1 else self.moves2
        return table.get(state, ())

    def transition(self, state: str, a1: str, a2: str) -> Distribution:
        return self.delta[(state, a1, a2)]

    def successors(self, state: str) -> Set[str]:
        result: Set[str] = set()
        for a in self.moves1.get(state, ()):
            for b in self.moves2.get(state, ()):
                result.update(self.delta[(state, a, b)].support)
        return result

    def is_absorbing(self, state: str) -> bool:
        return all(
            self.delta[(state, a, b)].support == (state,)
            for a in self.moves1[state] for b in self.moves2[state]
        )

    def with_backend(self, backend: NumericBackend) -> "ConcurrentGame":
        return ConcurrentGame(self.states, self.moves1, self.moves2, self.delta, backend)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ConcurrentGame)
            and self.states == other.states
            and self.moves1 == other.moves1
            and self.moves2 == other.moves2
            and self.delta == other.delta
        )

    def __repr__(self) -> str:
        return f"{type(self).__name__}(states={len(self.states)}, transitions={len(self.delta)})"


class Mdp(ConcurrentGame):
    """Concurrent game where the non-deciding player has a single move at every state."""

    def __init__(self, states, moves1, moves2, delta, player: int, backend=None):
        super().__init__(states, moves1, moves2, delta, backend)
        self.player = player

    def actions(self, state: str) -> Tuple[str, ...]:
        return self.available(self.player, state)

    def action_dist(self, state: str, action: str) -> Distribution:
        if self.player == PLAYER1:
            return self.delta[(state, action, self.moves2[state][0])]
        return self.delta[(state, self.moves1[state][0], action)]


class MarkovChain:
    """Successor distribution per state."""

    def __init__(self, states: Sequence[str], rows: Mapping, backend: Optional[NumericBackend] = None):
        self.backend = backend or FloatBackend()
        self.states: Tuple[str, ...] = tuple(states)
        self.rows: Dict[str, Distribution] = {
            s: Distribution({t: self.backend.convert(p) for t, p in row.items()})
            for s, row in rows.items()
        }

    def __getitem__(self, state: str) -> Distribution:
        return self.rows[state]

    def __repr__(self) -> str:
        return f"MarkovChain(states={len(self.states)})"


class TurnBasedGame:
    """
    Turn-based stochastic game graph.

    Attributes:
        states: ordered state identifiers
        owner: state -> 'p1' | 'p2' | 'random'
        edges: state -> successor tuple
        dist: random state -> Distribution over successors
    """

    def __init__(
        self,
        states: Sequence[str],
        owner: Mapping,
        edges: Mapping,
        dist: Mapping,
        backend: Optional[NumericBackend] = None
    ):
        self.backend = backend or FloatBackend()
        self.states: Tuple[str, ...] = tuple(states)
        self.owner: Dict[str, str] = dict(owner)
        self.edges: Dict[str, Tuple[str, ...]] = {s: tuple(e) for s, e in edges.items()}
        self.dist: Dict[str, Distribution] = {
            s: Distribution({t: self.backend.convert(p) for t, p in d.items()})
            for s, d in dist.items()
        }

    def player_states(self, owner: str) -> List[str]:
        return [s for s in self.states if self.owner.get(s) == owner]

    @property
    def random_states(self) -> List[str]:
        return self.player_states(OWNER_RANDOM)

    def is_binary(self) -> bool:
        """Every random state has at most two successors, uniformly weighted."""
        for s in self.random_states:
            support = self.dist[s].support
            if len(support) > 2:
                return False
            if len(support) == 2 and any(self.dist[s][t] * 2 != 1 for t in support):
                return False
        return True

    def with_backend(self, backend: NumericBackend) -> "TurnBasedGame":
        return TurnBasedGame(self.states, self.owner, self.edges, self.dist, backend)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TurnBasedGame)
            and self.states == other.states
            and self.owner == other.owner
            and self.edges == other.edges
            and self.dist == other.dist
        )

    def __repr__(self) -> str:
        return f"TurnBasedGame(states={len(self.states)})"


AnyGame = Union[ConcurrentGame, TurnBasedGame]


@dataclass(frozen=True)
class Diagnostic:
    """One invariant violation found by validate_game."""

    state: Optional[str]
    field: str
    reason: str

    def __str__(self) -> str:
        where = self.state if self.state is not None else "<game>"
        return f"{where}: {self.field}: {self.reason}"


def _check_distribution(
    dist: Distribution, known: Set[str], backend: NumericBackend, state: str, field: str
) -> List[Diagnostic]:
    problems = []
    if any(p < 0 for p in dist.values()):
        problems.append(Diagnostic(state, field, "negative probability"))
    if not dist.support:
        problems.append(Diagnostic(state, field, "empty support"))
    elif not backend.sums_to_one(dist.total()):
        problems.append(Diagnostic(state, field, f"distribution sum is {backend.format(dist.total())}, not 1"))
    unknown = [t for t in dist if t not in known]
    if unknown:
        problems.append(Diagnostic(state, field, f"unknown target states {unknown}"))
    return problems


def _validate_concurrent(game: ConcurrentGame) -> List[Diagnostic]:
    problems: List[Diagnostic] = []
    known = set(game.states)
    if len(known) != len(game.states):
        problems.append(Diagnostic(None, "states", "duplicate state identifiers"))
    for name, table in (("moves1", game.moves1), ("moves2", game.moves2)):
        for s in table:
            if s not in known:
                problems.append(Diagnostic(s, name, "moves given for unknown state"))
    expected = set()
    for s in game.states:
        m1, m2 = game.moves1.get(s, ()), game.moves2.get(s, ())
        if not m1:
            problems.append(Diagnostic(s, "moves1", "empty move set"))
        if not m2:
            problems.append(Diagnostic(s, "moves2", "empty move set"))
        for a in m1:
            for b in m2:
                expected.add((s, a, b))
                if (s, a, b) not in game.delta:
                    problems.append(Diagnostic(s, "transitions", f"missing transition for ({a}, {b})"))
                else:
                    problems.extend(_check_distribution(
                        game.delta[(s, a, b)], known, game.backend, s, f"transitions ({a}, {b})"
                    ))
    for key in game.delta:
        if key not in expected:
            problems.append(Diagnostic(key[0], "transitions", f"transition for unavailable moves ({key[1]}, {key[2]})"))
    return problems


def _validate_turn_based(game: TurnBasedGame) -> List[Diagnostic]:
    problems: List[Diagnostic] = []
    known = set(game.states)
    if len(known) != len(game.states):
        problems.append(Diagnostic(None, "states", "duplicate state identifiers"))
    for s in game.states:
        owner = game.owner.get(s)
        if owner not in OWNERS:
            problems.append(Diagnostic(s, "owner", f"owner must be one of {OWNERS}, got {owner!r}"))
        succ = game.edges.get(s, ())
        if not succ:
            problems.append(Diagnostic(s, "edges", "no outgoing edge"))
        unknown = [t for t in succ if t not in known]
        if unknown:
            problems.append(Diagnostic(s, "edges", f"unknown successor states {unknown}"))
        if owner == OWNER_RANDOM:
            if s not in game.dist:
                problems.append(Diagnostic(s, "dist", "random state without distribution"))
                continue
            dist = game.dist[s]
            problems.extend(_check_distribution(dist, known, game.backend, s, "dist"))
            if set(dist.support) != set(succ):
                problems.append(Diagnostic(s, "dist", "support differs from the edge set"))
    for s in game.dist:
        if game.owner.get(s) != OWNER_RANDOM:
            problems.append(Diagnostic(s, "dist", "distribution given for a non-random state"))
    for s in set(game.owner) | set(game.edges):
        if s not in known:
            problems.append(Diagnostic(s, "states", "unknown state in owner/edges"))
    return problems


def validate_game(game: AnyGame) -> List[Diagnostic]:
    """
    Check every structural invariant of a game.

    Args:
        game: ConcurrentGame or TurnBasedGame

    Returns:
        List of diagnostics, empty iff the game is well formed
    """
    if isinstance(game, TurnBasedGame):
        return _validate_turn_based(game)
    return _validate_concurrent(game)


def check_selector(game: ConcurrentGame, selector: Selector) -> None:
    """Raise InvalidSelectorError unless the selector is a valid choice at every state."""
    backend = game.backend
    for s in game.states:
        dist = selector[s]
        allowed = set(game.available(selector.owner, s))
        if any(p < 0 for p in dist.values()):
            raise InvalidSelectorError(f"selector for player {selector.owner} has a negative probability at {s}")
        outside = [m for m in dist.support if m not in allowed]
        if outside:
            raise InvalidSelectorError(
                f"selector for player {selector.owner} plays {outside} at {s}, available {sorted(allowed)}"
            )
        if not dist.support or not backend.sums_to_one(dist.total()):
            raise InvalidSelectorError(f"selector for player {selector.owner} is not a distribution at {s}")


def make_absorbing(game: ConcurrentGame, absorbing: Iterable[str]) -> ConcurrentGame:
    """
    Turn the given states into absorbing states with 1x1 move sets.

    Args:
        game: concurrent game
        absorbing: states to make absorbing

    Returns:
        New game, equal to the input outside `absorbing`
    """
    absorbing = set(absorbing)
    unknown = absorbing - set(game.states)
    if unknown:
        raise ValueError(f"Unknown states: {sorted(unknown)}")
    moves1, moves2, delta = dict(game.moves1), dict(game.moves2), dict(game.delta)
    for s in game.states:
        if s not in absorbing:
            continue
        a, b = game.moves1[s][0], game.moves2[s][0]
        for a_old in game.moves1[s]:
            for b_old in game.moves2[s]:
                delta.pop((s, a_old, b_old), None)
        moves1[s], moves2[s] = (a,), (b,)
        delta[(s, a, b)] = Distribution.point(s, game.backend)
    return ConcurrentGame(game.states, moves1, moves2, delta, game.backend)


def fix_selector(game: ConcurrentGame, selector: Selector) -> Mdp:
    """
    Fix one player's selector, leaving an MDP for the other player.

    The fixed player is left with the single move DUMMY_MOVE and
    delta'(s, b)(t) = sum_a delta(s, a, b)(t) * selector(s)(a) (mirrored for player 2).
    """
    check_selector(game, selector)
    backend = game.backend
    moves1, moves2, delta = {}, {}, {}
    for s in game.states:
        dist = selector[s]
        if selector.owner == PLAYER1:
            moves1[s], moves2[s] = (DUMMY_MOVE,), game.moves2[s]
            for b in game.moves2[s]:
                delta[(s, DUMMY_MOVE, b)] = Distribution.mix(
                    ((p, game.delta[(s, a, b)]) for a, p in dist.items()), backend
                )
        else:
            moves1[s], moves2[s] = game.moves1[s], (DUMMY_MOVE,)
            for a in game.moves1[s]:
                delta[(s, a, DUMMY_MOVE)] = Distribution.mix(
                    ((p, game.delta[(s, a, b)]) for b, p in dist.items()), backend
                )
    return Mdp(game.states, moves1, moves2, delta, other(selector.owner), backend)


def fix_both(game: ConcurrentGame, xi1: Selector, xi2: Selector) -> MarkovChain:
    """Markov chain obtained by fixing a selector for each player."""
    if xi1.owner != PLAYER1 or xi2.owner != PLAYER2:
        raise InvalidSelectorError("fix_both expects a player-1 and a player-2 selector")
    check_selector(game, xi1)
    check_selector(game, xi2)
    backend = game.backend
    rows = {}
    for s in game.states:
        rows[s] = Distribution.mix(
            (
                (pa * pb, game.delta[(s, a, b)])
                for a, pa in xi1[s].items()
                for b, pb in xi2[s].items()
            ),
            backend
        )
    return MarkovChain(game.states, rows, backend)


MoveChoice = Union[Selector, Distribution, Iterable[str], str]


def _moves_of(choice: MoveChoice, state: str) -> Tuple[str, ...]:
    if isinstance(choice, Selector):
        return choice.support(state)
    if isinstance(choice, Distribution):
        return choice.support
    if isinstance(choice, str):
        return (choice,)
    return tuple(choice)


def destinations(game: ConcurrentGame, state: str, choice1: MoveChoice, choice2: MoveChoice) -> Set[str]:
    """
    Possible successors of a state.

    Args:
        game: concurrent game
        state: the state
        choice1, choice2: selector, distribution, move, or set of moves for each player

    Returns:
        Union of supp(delta(state, a, b)) over the supported move pairs
    """
    result: Set[str] = set()
    for a in _moves_of(choice1, state):
        for b in _moves_of(choice2, state):
            result.update(game.delta[(state, a, b)].support)
    return result


def value_class(v: Valuation, r: Number, backend: NumericBackend) -> Set[str]:
    """States whose value equals r (within tau_eq in float mode)."""
    return {s for s, x in v.items() if backend.eq(x, r)}


def to_concurrent(game: TurnBasedGame) -> ConcurrentGame:
    """
    Encode a turn-based game as a concurrent one.

    The owner of a state plays the successor identifiers as moves and the
    other player gets DUMMY_MOVE. Random states get DUMMY_MOVE for both.
    """
    backend = game.backend
    moves1, moves2, delta = {}, {}, {}
    for s in game.states:
        owner = game.owner[s]
        succ = game.edges[s]
        if owner == OWNER_P1:
            moves1[s], moves2[s] = succ, (DUMMY_MOVE,)
            for t in succ:
                delta[(s, t, DUMMY_MOVE)] = Distribution.point(t, backend)
        elif owner == OWNER_P2:
            moves1[s], moves2[s] = (DUMMY_MOVE,), succ
            for t in succ:
                delta[(s, DUMMY_MOVE, t)] = Distribution.point(t, backend)
        else:
            moves1[s], moves2[s] = (DUMMY_MOVE,), (DUMMY_MOVE,)
            delta[(s, DUMMY_MOVE, DUMMY_MOVE)] = game.dist[s]
    return ConcurrentGame(game.states, moves1, moves2, delta, backend)


def as_concurrent(game: AnyGame) -> ConcurrentGame:
    if isinstance(game, TurnBasedGame):
        return to_concurrent(game)
    return game


def swap_players(game: ConcurrentGame) -> ConcurrentGame:
    """Exchange the roles of the two players."""
    delta = {(s, b, a): dist for (s, a, b), dist in game.delta.items()}
    return ConcurrentGame(game.states, game.moves2, game.moves1, delta, game.backend)
