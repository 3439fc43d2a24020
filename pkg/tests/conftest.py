"""Shared fixtures: the bundled game files and both numeric backends."""

from pathlib import Path

import pytest

from src.game_io import load_game
from src.numeric import FloatBackend, RationalBackend

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def float_backend():
    return FloatBackend()


@pytest.fixture
def rational_backend():
    return RationalBackend()


@pytest.fixture
def hide_game():
    return load_game(FIXTURES / "hide.json", FloatBackend())


@pytest.fixture
def ex1_game():
    return load_game(FIXTURES / "ex1.json", RationalBackend())


@pytest.fixture
def binary_tb_game():
    return load_game(FIXTURES / "binary_tb.json", RationalBackend())
