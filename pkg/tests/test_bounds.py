import math

import pytest

from src.bounds import k_uniform_bound, termination_bounds, transition_bit_size


def test_binary_turn_based_report(binary_tb_game):
    report = termination_bounds(binary_tb_game, 1e-3)
    assert report.turn_based and report.binary
    assert report.num_states == 7
    assert report.num_random == 3
    assert report.num_player1 == 3
    assert report.denominator_bound == 16
    assert report.verified_denominator_bound == 64
    assert report.si_iteration_bound == 7 * 16
    assert report.strategy_bound == 2
    assert report.delta_bits == 30
    assert not report.delta_bits_approximate
    assert report.to_dict()["denominator_bound"] == 16


def test_non_binary_game_has_no_denominator_bound(ex1_game):
    report = termination_bounds(ex1_game, 1e-3)
    assert report.turn_based and not report.binary
    assert report.denominator_bound is None
    assert report.si_iteration_bound is None
    assert report.strategy_bound == 2 * 1 * 1 * 1


def test_concurrent_report(hide_game):
    report = termination_bounds(hide_game, 0.1)
    assert not report.turn_based
    assert report.num_random == 0
    assert report.strategy_bound == 2
    assert report.delta_bits == 12
    assert report.delta_bits_approximate
    expected = k_uniform_bound(3, 12, 0.1)
    assert report.k_uniform == pytest.approx(expected)
    assert report.log10_k_uniform_iterations == pytest.approx(2 * 12 * math.log10(expected))


def test_transition_bit_size_rational(binary_tb_game):
    assert transition_bit_size(binary_tb_game) == (30, False)


def test_k_uniform_formula():
    assert k_uniform_bound(3, 12, 0.1) == pytest.approx(192 * 81 * math.log(48) / 0.01)
    with pytest.raises(ValueError):
        k_uniform_bound(3, 12, 0)
