from fractions import Fraction

import numpy as np
import pytest

from src.errors import ImproperSelectorError
from src.game_model import PLAYER1, PLAYER2, REACH, ConcurrentGame, MarkovChain, Mdp, Objective, Selector, fix_both, fix_selector
from src.improvement import iterate_values, value_iteration
from src.mdp_solver import (
    backward_reachable,
    chain_reach,
    improper_component,
    is_proper,
    max_end_components,
    mdp_reach_value,
    reach_value_of_selector,
    safety_value_of_selector,
)
from src.numeric import FloatBackend, RationalBackend
from tests.helpers import (
    brute_force_end_components,
    pure_selectors,
    random_concurrent_game,
    random_selector,
    random_subset,
)

BACKENDS = [FloatBackend(), RationalBackend()]


def _trap_mdp(backend):
    """a: x loops, y splits t/d. b: x goes to a, z reaches t with 1/4 and loops otherwise."""
    states = ["a", "b", "t", "d"]
    moves1 = {"a": ["x", "y"], "b": ["x", "z"], "t": ["_"], "d": ["_"]}
    moves2 = {s: ["_"] for s in states}
    delta = {
        ("a", "x", "_"): {"a": 1},
        ("a", "y", "_"): {"t": Fraction(1, 2), "d": Fraction(1, 2)},
        ("b", "x", "_"): {"a": 1},
        ("b", "z", "_"): {"t": Fraction(1, 4), "b": Fraction(3, 4)},
        ("t", "_", "_"): {"t": 1},
        ("d", "_", "_"): {"d": 1},
    }
    return Mdp(states, moves1, moves2, delta, PLAYER1, backend)


def _loop_game(backend):
    """Player 2 can keep the play at s against (a) and send it to bad against (b)."""
    return ConcurrentGame(
        ["s", "t", "bad"],
        {"s": ["a", "b"], "t": ["_"], "bad": ["_"]},
        {"s": ["c", "d"], "t": ["_"], "bad": ["_"]},
        {
            ("s", "a", "c"): {"s": 1},
            ("s", "a", "d"): {"t": 1},
            ("s", "b", "c"): {"t": 1},
            ("s", "b", "d"): {"bad": 1},
            ("t", "_", "_"): {"t": 1},
            ("bad", "_", "_"): {"bad": 1},
        },
        backend,
    )


def test_backward_reachable():
    edges = {"a": ["b"], "b": ["c"], "c": ["c"], "d": ["a"], "e": ["e"]}
    assert backward_reachable(edges, edges, ["c"]) == {"a", "b", "c", "d"}


@pytest.mark.parametrize("backend", BACKENDS, ids=["float", "rational"])
def test_chain_reach(backend):
    half = backend.convert(Fraction(1, 2))
    chain = MarkovChain(
        ["s0", "s1", "s2", "s3"],
        {
            "s0": {"s1": half, "s2": half},
            "s1": {"s1": backend.one},
            "s2": {"s0": half, "s3": half},
            "s3": {"s3": backend.one},
        },
        backend,
    )
    values = chain_reach(chain, ["s1"])
    assert values["s0"] == pytest.approx(Fraction(2, 3))
    assert values["s2"] == pytest.approx(Fraction(1, 3))
    assert values["s3"] == 0
    if backend.exact:
        assert values["s0"] == Fraction(2, 3)


@pytest.mark.parametrize("backend", BACKENDS, ids=["float", "rational"])
def test_mdp_reach_value_and_witness(backend):
    mdp = _trap_mdp(backend)
    values, witness = mdp_reach_value(mdp, ["t"])
    assert values["a"] == pytest.approx(0.5)
    assert values["b"] == pytest.approx(1.0)
    assert witness["a"].support == ("y",)
    assert witness["b"].support == ("z",)
    assert witness.owner == PLAYER1


def test_mdp_reach_value_avoid():
    mdp = _trap_mdp(RationalBackend())
    values, _ = mdp_reach_value(mdp, ["t"], avoid=["b"])
    assert values["b"] == 0
    assert values["a"] == Fraction(1, 2)


def test_max_end_components_simple():
    mdp = _trap_mdp(RationalBackend())
    components = {c.states: c.action_map() for c in max_end_components(mdp)}
    assert components == {
        frozenset({"a"}): {"a": ("x",)},
        frozenset({"t"}): {"t": ("_",)},
        frozenset({"d"}): {"d": ("_",)},
    }
    inside = max_end_components(mdp, within=["a", "b"])
    assert [c.states for c in inside] == [frozenset({"a"})]


def test_max_end_components_match_brute_force():
    rng = np.random.default_rng(5)
    backend = RationalBackend()
    for _ in range(60):
        game = random_concurrent_game(rng, backend, max_states=4)
        mdp = fix_selector(game, Selector.uniform(game, PLAYER1))
        found = {c.states for c in max_end_components(mdp)}
        assert found == set(brute_force_end_components(mdp))


def test_properness():
    backend = RationalBackend()
    game = _loop_game(backend)
    uniform = Selector.uniform(game, PLAYER1)
    pure_a = Selector.pure(game, PLAYER1, {"s": "a"})
    goal = ["t", "bad"]
    assert is_proper(game, uniform, goal)
    assert not is_proper(game, pure_a, goal)
    component = improper_component(game, pure_a, goal)
    assert component.states == frozenset({"s"})
    assert component.action_map() == {"s": ("c",)}


def test_reach_value_of_selector():
    backend = RationalBackend()
    game = _loop_game(backend)
    values = reach_value_of_selector(game, Selector.uniform(game, PLAYER1), ["t"], ["bad"])
    assert values["s"] == Fraction(1, 2)
    assert values["t"] == 1
    assert values["bad"] == 0
    with pytest.raises(ImproperSelectorError) as excinfo:
        reach_value_of_selector(game, Selector.pure(game, PLAYER1, {"s": "a"}), ["t"], ["bad"])
    assert excinfo.value.component.states == frozenset({"s"})


def test_safety_value_of_selector(hide_game):
    values = safety_value_of_selector(hide_game, Selector.uniform(hide_game, PLAYER1), ["home", "field"])
    assert values["field"] == pytest.approx(0.5)
    assert values["home"] == pytest.approx(1.0)
    assert values["caught"] == pytest.approx(0.0)
    pure = Selector.pure(hide_game, PLAYER1, {"field": "l"})
    assert safety_value_of_selector(hide_game, pure, ["home", "field"])["field"] == pytest.approx(0.0)


def test_fixed_player_two_selector():
    backend = RationalBackend()
    game = _loop_game(backend)
    mdp = fix_selector(game, Selector.pure(game, PLAYER2, {"s": "c"}))
    values, witness = mdp_reach_value(mdp, ["t"])
    assert values["s"] == 1
    assert witness["s"].support == ("b",)


def _random_mdp(rng, backend):
    game = random_concurrent_game(rng, backend, max_states=4)
    return fix_selector(game, Selector.uniform(game, PLAYER2))


def test_mdp_reach_value_matches_pure_policies():
    rng = np.random.default_rng(21)
    for _ in range(60):
        mdp = _random_mdp(rng, RationalBackend())
        T = random_subset(rng, list(mdp.states))
        values, witness = mdp_reach_value(mdp, T)
        passive = Selector.pure(mdp, PLAYER2, {})
        best = {s: 0 for s in mdp.states}
        for policy in pure_selectors(mdp, PLAYER1):
            reach = chain_reach(fix_both(mdp, policy, passive), T)
            best = {s: max(best[s], reach[s]) for s in mdp.states}
        assert dict(values) == best
        assert dict(chain_reach(fix_both(mdp, witness, passive), T)) == best


@pytest.mark.slow
def test_value_iteration_approaches_mdp_value_from_below():
    rng = np.random.default_rng(22)
    for _ in range(40):
        mdp = _random_mdp(rng, RationalBackend())
        T = random_subset(rng, list(mdp.states))
        exact, _ = mdp_reach_value(mdp, T)
        approx = mdp.with_backend(FloatBackend())
        objective = Objective(REACH, T)
        for _, u in zip(range(200), iterate_values(approx, objective)):
            assert all(u[s] <= float(exact[s]) + 1e-9 for s in mdp.states)
        limit = value_iteration(approx, objective, 100000, tolerance=1e-15)
        assert all(abs(limit[s] - float(exact[s])) <= 1e-6 for s in mdp.states)


def test_properness_matches_pure_counter_strategies():
    rng = np.random.default_rng(23)
    backend = RationalBackend()
    for _ in range(80):
        game = random_concurrent_game(rng, backend, max_states=4)
        xi1 = random_selector(rng, game, PLAYER1)
        goal = random_subset(rng, list(game.states))
        always = all(
            all(x == 1 for x in chain_reach(fix_both(game, xi1, xi2), goal).values())
            for xi2 in pure_selectors(game, PLAYER2)
        )
        assert is_proper(game, xi1, goal) == always
