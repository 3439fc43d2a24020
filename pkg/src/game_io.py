"""Reading and writing game files (JSON, UTF-8)."""

import json
import logging
import sys
from pathlib import Path
from typing import Dict, Mapping, Union

from src.errors import GameFormatError, InvalidGameError
from src.game_model import AnyGame, ConcurrentGame, TurnBasedGame, validate_game
from src.numeric import FloatBackend, NumericBackend, parse_probability

logger = logging.getLogger(__name__)

CONCURRENT = "concurrent"
TURN_BASED = "turn-based"


def _require(doc: Mapping, key: str, kind: type, where: str = "game"):
    if key not in doc:
        raise GameFormatError(f"{where}: missing key '{key}'")
    value = doc[key]
    if not isinstance(value, kind):
        raise GameFormatError(f"{where}: '{key}' must be a {kind.__name__}")
    return value


def _string_list(value, where: str):
    if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
        raise GameFormatError(f"{where}: expected a list of strings")
    return value


def _parse_dist(raw, backend: NumericBackend, where: str) -> Dict:
    if not isinstance(raw, dict):
        raise GameFormatError(f"{where}: distribution must be an object")
    try:
        return {t: parse_probability(p, backend) for t, p in raw.items()}
    except GameFormatError as exc:
        raise GameFormatError(f"{where}: {exc}")


def _parse_concurrent(doc: Mapping, backend: NumericBackend) -> ConcurrentGame:
    states = _string_list(_require(doc, "states", list), "states")
    moves = {}
    for key in ("moves1", "moves2"):
        table = _require(doc, key, dict)
        moves[key] = {s: tuple(_string_list(m, f"{key}.{s}")) for s, m in table.items()}
    delta = {}
    for n, entry in enumerate(_require(doc, "transitions", list)):
        where = f"transitions[{n}]"
        if not isinstance(entry, dict):
            raise GameFormatError(f"{where}: must be an object")
        key = tuple(_require(entry, name, str, where) for name in ("from", "a1", "a2"))
        if key in delta:
            raise GameFormatError(f"{where}: duplicate transition {key}")
        delta[key] = _parse_dist(_require(entry, "dist", dict, where), backend, where)
    return ConcurrentGame(states, moves["moves1"], moves["moves2"], delta, backend)


def _parse_turn_based(doc: Mapping, backend: NumericBackend) -> TurnBasedGame:
    owner = _require(doc, "owner", dict)
    states = _string_list(doc["states"], "states") if "states" in doc else list(owner)
    edges = {s: tuple(_string_list(e, f"edges.{s}")) for s, e in _require(doc, "edges", dict).items()}
    raw_dist = doc.get("dist", {})
    if not isinstance(raw_dist, dict):
        raise GameFormatError("game: 'dist' must be an object")
    dist = {s: _parse_dist(d, backend, f"dist.{s}") for s, d in raw_dist.items()}
    return TurnBasedGame(states, owner, edges, dist, backend)


def parse_game_document(doc, backend: NumericBackend = None) -> AnyGame:
    """
    Build a game from a decoded JSON document and validate it.

    Raises:
        GameFormatError: schema violation
        InvalidGameError: the game violates an invariant
    """
    backend = backend or FloatBackend()
    if not isinstance(doc, dict):
        raise GameFormatError("game file must contain a JSON object")
    kind = doc.get("kind", CONCURRENT)
    if kind == CONCURRENT:
        game = _parse_concurrent(doc, backend)
    elif kind == TURN_BASED:
        game = _parse_turn_based(doc, backend)
    else:
        raise GameFormatError(f"unknown game kind {kind!r}")
    diagnostics = validate_game(game)
    if diagnostics:
        raise InvalidGameError(diagnostics)
    return game


def parse_game_text(text: str, backend: NumericBackend = None) -> AnyGame:
    # Numbers are kept as text so rational mode sees the literal digits
    try:
        doc = json.loads(text, parse_float=str, parse_int=str)
    except json.JSONDecodeError as exc:
        raise GameFormatError(f"malformed JSON: {exc}")
    return parse_game_document(doc, backend)


def load_game(path: Union[str, Path], backend: NumericBackend = None) -> AnyGame:
    """
    Read a game file; '-' reads standard input.

    Args:
        path: file path or '-'
        backend: numeric backend for the probabilities

    Returns:
        ConcurrentGame or TurnBasedGame
    """
    if str(path) == "-":
        text = sys.stdin.read()
    else:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise GameFormatError(f"cannot read {path}: {exc}")
    game = parse_game_text(text, backend)
    logger.info("loaded %s with %d states from %s", type(game).__name__, len(game.states), path)
    return game


def _emit_probability(p, backend: NumericBackend) -> str:
    if backend.exact:
        return backend.format(p)
    return repr(float(p))


def emit_game(game: AnyGame) -> Dict:
    """JSON document for a game; parse_game_document(emit_game(g)) reproduces g."""
    backend = game.backend
    if isinstance(game, TurnBasedGame):
        return {
            "kind": TURN_BASED,
            "states": list(game.states),
            "owner": dict(game.owner),
            "edges": {s: list(e) for s, e in game.edges.items()},
            "dist": {
                s: {t: _emit_probability(p, backend) for t, p in d.items()}
                for s, d in game.dist.items()
            },
        }
    return {
        "kind": CONCURRENT,
        "states": list(game.states),
        "moves1": {s: list(m) for s, m in game.moves1.items()},
        "moves2": {s: list(m) for s, m in game.moves2.items()},
        "transitions": [
            {"from": s, "a1": a, "a2": b, "dist": {t: _emit_probability(p, backend) for t, p in d.items()}}
            for (s, a, b), d in game.delta.items()
        ],
    }


def save_game(game: AnyGame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(json.dumps(emit_game(game), indent=2) + "\n", encoding="utf-8")
    return path
