import math
import numpy as np
import pytest
from core.exp_unit import DEFAULT_ITERATIONS, exp_cycles, exp_range, exp_unit, exp_unit_array, scaling_steps


GRID = np.linspace(-1.0, 1.0, 10001)


def max_error(iterations):
    return float(np.max(np.abs(exp_unit_array(GRID, iterations) - np.exp(
        GRID))))


def test_accuracy_on_unit_interval():
    assert max_error(DEFAULT_ITERATIONS) <= 0.0001


def test_error_does_not_grow_with_iterations():
    errors = [max_error(m) for m in range(8, DEFAULT_ITERATIONS + 1)]
    assert all(b <= a for a, b in zip(errors, errors[1:]))


def test_single_term_is_exact():
    assert exp_unit(math.log(1.5)) == 1.5
    assert exp_unit(0.0) == 1.0


def test_large_inputs_are_scaled():
    assert scaling_steps(5.0) == 3
    assert scaling_steps(-0.5) == 0
    assert exp_unit(5.0) == pytest.approx(math.exp(5.0), rel=1e-05)
    assert exp_unit(-6.0) == pytest.approx(math.exp(-6.0), rel=1e-05)


def test_fewer_iterations_lose_accuracy():
    coarse = abs(exp_unit(0.3, iterations=4) - math.exp(0.3))
    fine = abs(exp_unit(0.3) - math.exp(0.3))
    assert fine < coarse


def test_range_covers_unit_interval():
    assert exp_range(DEFAULT_ITERATIONS) > 1.0


def test_cycle_count():
    assert exp_cycles(0.5) == DEFAULT_ITERATIONS
    assert exp_cycles(-3.0) == DEFAULT_ITERATIONS + 2 + 1


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        exp_unit(math.inf)
    with pytest.raises(ValueError):
        exp_unit(0.5, iterations=0)
