import io
import json
from fractions import Fraction

import pytest

from src.errors import GameFormatError, InvalidGameError
from src.game_io import emit_game, load_game, parse_game_document, parse_game_text, save_game
from src.game_model import ConcurrentGame, TurnBasedGame
from src.numeric import FloatBackend, RationalBackend

TINY = {
    "kind": "concurrent",
    "states": ["s", "t"],
    "moves1": {"s": ["a"], "t": ["_"]},
    "moves2": {"s": ["b"], "t": ["_"]},
    "transitions": [
        {"from": "s", "a1": "a", "a2": "b", "dist": {"s": "1/2", "t": "1/2"}},
        {"from": "t", "a1": "_", "a2": "_", "dist": {"t": 1}},
    ],
}


def _with_dist(dist):
    doc = json.loads(json.dumps(TINY))
    doc["transitions"][0]["dist"] = dist
    return doc


def test_load_hide(fixtures_dir):
    game = load_game(fixtures_dir / "hide.json")
    assert isinstance(game, ConcurrentGame)
    assert game.states == ("home", "field", "caught")


def test_load_turn_based(fixtures_dir):
    game = load_game(fixtures_dir / "ex1.json", RationalBackend())
    assert isinstance(game, TurnBasedGame)
    assert game.random_states == ["s2", "s3"]
    assert game.dist["s2"]["s6"] == Fraction(2, 3)


def test_round_trip(ex1_game, hide_game, tmp_path):
    for game in (ex1_game, hide_game):
        assert parse_game_document(emit_game(game), game.backend) == game
        path = save_game(game, tmp_path / "game.json")
        assert load_game(path, game.backend) == game


def test_rational_emit_uses_fractions(ex1_game):
    assert emit_game(ex1_game)["dist"]["s2"] == {"s4": "1/3", "s6": "2/3"}


def test_probability_above_one_rejected():
    with pytest.raises(GameFormatError, match="outside"):
        parse_game_document(_with_dist({"s": "2/1"}), RationalBackend())


def test_distribution_sum_reported():
    with pytest.raises(InvalidGameError) as excinfo:
        parse_game_document(_with_dist({"s": "1/2", "t": "1/4"}), RationalBackend())
    assert any(d.field == "transitions (a, b)" for d in excinfo.value.diagnostics)


def test_decimal_numbers_are_read_exactly():
    game = parse_game_text(json.dumps(_with_dist({"s": 0.1, "t": 0.9})), RationalBackend())
    assert game.delta[("s", "a", "b")]["s"] == Fraction(1, 10)


@pytest.mark.parametrize("text, message", [
    ("{not json", "malformed JSON"),
    ("[1, 2]", "JSON object"),
    ('{"kind": "parity"}', "unknown game kind"),
    ('{"kind": "concurrent", "states": ["s"]}', "missing key 'moves1'"),
])
def test_schema_errors(text, message):
    with pytest.raises(GameFormatError, match=message):
        parse_game_text(text)


def test_missing_file(tmp_path):
    with pytest.raises(GameFormatError, match="cannot read"):
        load_game(tmp_path / "missing.json")


def test_states_default_to_owner_keys():
    doc = {
        "kind": "turn-based",
        "owner": {"x": "p1", "y": "p2"},
        "edges": {"x": ["y"], "y": ["x"]},
    }
    game = parse_game_document(doc, FloatBackend())
    assert game.states == ("x", "y")


def test_load_from_stdin(monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps(TINY)))
    game = load_game("-", RationalBackend())
    assert game.delta[("s", "a", "b")]["t"] == Fraction(1, 2)
