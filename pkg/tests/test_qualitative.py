import numpy as np
import pytest

from src.game_model import (
    OWNER_P1,
    OWNER_P2,
    PLAYER1,
    PLAYER2,
    ConcurrentGame,
    Distribution,
    Selector,
    fix_both,
    other,
    to_concurrent,
)
from src.mdp_solver import chain_reach
from src.qualitative import (
    almost_sure_safe_concurrent,
    almost_sure_safe_tb,
    attractor_tb,
    reach_value_zero_set,
    support_selector,
)
from src.numeric import RationalBackend
from tests.helpers import pure_strategies, random_subset, random_turn_based_game

EX1_SAFE = ["s0", "s1", "s2", "s3", "s4", "s5"]


def _partial_game(backend):
    """At s only move a is safe against both opponent moves."""
    table = {("a", "x"): "s", ("a", "y"): "s", ("b", "x"): "s", ("b", "y"): "bad", ("c", "x"): "bad", ("c", "y"): "bad"}
    delta = {("s", a, b): {t: 1} for (a, b), t in table.items()}
    delta[("bad", "_", "_")] = {"bad": 1}
    return ConcurrentGame(
        ["s", "bad"],
        {"s": ["a", "b", "c"], "bad": ["_"]},
        {"s": ["x", "y"], "bad": ["_"]},
        delta,
        backend,
    )


def test_attractor_opponent(ex1_game):
    attractor, selector = attractor_tb(ex1_game, PLAYER2, ["s6"])
    assert attractor == {"s0", "s1", "s2", "s3", "s6"}
    assert selector.owner == PLAYER2
    assert selector["s1"].support == ("s3",)
    assert "s0" not in selector.choice


def test_attractor_player_one(ex1_game):
    attractor, selector = attractor_tb(ex1_game, PLAYER1, ["s4"])
    assert attractor == {"s0", "s2", "s4"}
    assert selector["s0"].support == ("s2",)


def test_almost_sure_safe_tb(ex1_game):
    result = almost_sure_safe_tb(ex1_game, PLAYER1, EX1_SAFE)
    assert result.winning == frozenset({"s4", "s5"})
    assert result.witness["s4"].support == ("s4",)


def test_almost_sure_safe_tb_player_two(ex1_game):
    # Player 2 keeps the play in {s0, s1} only if player 1 cooperates, so only absorbing states win
    result = almost_sure_safe_tb(ex1_game, PLAYER2, ["s0", "s1", "s6"])
    assert result.winning == frozenset({"s6"})


def test_almost_sure_safe_concurrent_hide(hide_game):
    result = almost_sure_safe_concurrent(hide_game, PLAYER1, ["home", "field"])
    assert result.winning == frozenset({"home"})
    assert result.witness == {"home": ("_",)}
    opponent = almost_sure_safe_concurrent(hide_game, PLAYER2, ["field", "caught"])
    assert opponent.winning == frozenset({"caught"})


def test_reach_value_zero_set(hide_game):
    assert reach_value_zero_set(hide_game, ["home"]).winning == frozenset({"caught"})
    assert reach_value_zero_set(hide_game, ["caught"]).winning == frozenset({"home"})


def test_safe_move_support():
    backend = RationalBackend()
    game = _partial_game(backend)
    result = almost_sure_safe_concurrent(game, PLAYER1, ["s"])
    assert result.winning == frozenset({"s"})
    assert result.witness == {"s": ("a",)}


def test_support_selector():
    backend = RationalBackend()
    game = _partial_game(backend)
    selector = support_selector(game, {"s": ("a", "b")}, PLAYER1)
    assert dict(selector["s"]) == dict(Distribution.uniform(["a", "b"], backend))
    assert selector["bad"].support == ("_",)
    default = Selector.pure(game, PLAYER1, {"s": "c"})
    assert support_selector(game, {}, PLAYER1, default=default)["s"].support == ("c",)


@pytest.mark.parametrize("player", [PLAYER1, PLAYER2])
def test_empty_safe_set(hide_game, player):
    assert almost_sure_safe_concurrent(hide_game, player, []).winning == frozenset()


@pytest.mark.parametrize("player", [PLAYER1, PLAYER2])
def test_attractor_is_monotone_and_idempotent(player):
    rng = np.random.default_rng(60 + player)
    for _ in range(100):
        game = random_turn_based_game(rng, RationalBackend())
        states = list(game.states)
        T = random_subset(rng, states)
        wider = T + random_subset(rng, states)
        attractor, _ = attractor_tb(game, player, T)
        assert T and set(T) <= attractor
        assert attractor <= attractor_tb(game, player, wider)[0]
        assert attractor_tb(game, player, attractor)[0] == attractor


@pytest.mark.parametrize("player", [PLAYER1, PLAYER2])
def test_attractor_choice_reaches_target_with_positive_probability(player):
    rng = np.random.default_rng(70 + player)
    own, opponent = (OWNER_P1, OWNER_P2) if player == PLAYER1 else (OWNER_P2, OWNER_P1)
    for _ in range(100):
        game = random_turn_based_game(rng, RationalBackend())
        concurrent = to_concurrent(game)
        T = random_subset(rng, list(game.states))
        attractor, choice = attractor_tb(game, player, T)
        mine = Selector.pure(concurrent, player, {s: d.support[0] for s, d in choice.choice.items()})
        for moves in pure_strategies(game, opponent):
            theirs = Selector.pure(concurrent, other(player), moves)
            pair = (mine, theirs) if player == PLAYER1 else (theirs, mine)
            reach = chain_reach(fix_both(concurrent, *pair), T)
            assert all(reach[s] > 0 for s in attractor)
        assert set(choice.choice) <= set(game.player_states(own))


@pytest.mark.parametrize("player", [PLAYER1, PLAYER2])
def test_turn_based_safety_matches_concurrent_encoding(player):
    rng = np.random.default_rng(80 + player)
    for _ in range(100):
        game = random_turn_based_game(rng, RationalBackend())
        safe = random_subset(rng, list(game.states))
        turn_based = almost_sure_safe_tb(game, player, safe).winning
        assert turn_based == almost_sure_safe_concurrent(to_concurrent(game), player, safe).winning
