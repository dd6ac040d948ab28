"""
Iterative exponential unit.

The vector unit evaluates exp(x) with shifts and adds only: x is greedily
decomposed into a sum of the constants ln(1 + 2^-i), and every constant
taken multiplies the accumulator by (1 + 2^-i), which in hardware is one
shift and one add.
"""
from typing import Iterable, List
import math
import numpy as np

DEFAULT_ITERATIONS = 24


def _ln_table(iterations: int) -> List[float]:
    return [math.log(1.0 + 2.0 ** -i) for i in range(iterations)]


def exp_range(iterations: int) -> float:
    """Largest input the decomposition covers without scaling."""
    return sum(_ln_table(iterations))


def _decompose(x: float, iterations: int) -> float:
    accumulator, remainder = 1.0, x
    for i, term in enumerate(_ln_table(iterations)):
        if remainder >= term:
            remainder -= term
            accumulator += accumulator * 2.0 ** -i
    return accumulator


def scaling_steps(x: float) -> int:
    """Squarings needed so that |x| / 2^k <= 1."""
    magnitude = abs(x)
    if magnitude <= 1.0:
        return 0
    return int(math.ceil(math.log2(magnitude)))


def exp_unit(x: float, iterations: int = DEFAULT_ITERATIONS) -> float:
    """
    exp(x) by greedy shift-and-add decomposition.

    Negative inputs use the reciprocal of exp(-x); inputs with |x| > 1 are
    scaled by 2^-k and the result squared k times.
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f'exp_unit needs a finite input, got {x}')
    if iterations < 1:
        raise ValueError(f'iterations must be >= 1, got {iterations}')
    if x < 0:
        return 1.0 / exp_unit(-x, iterations)
    k = scaling_steps(x)
    result = _decompose(x / 2.0 ** k, iterations)
    for _ in range(k):
        result *= result
    return result


def exp_unit_array(xs: Iterable[float], iterations: int = DEFAULT_ITERATIONS
    ) -> np.ndarray:
    return np.array([exp_unit(x, iterations) for x in np.asarray(xs, dtype=
        np.float64).reshape(-1)])


def exp_cycles(x: float, iterations: int = DEFAULT_ITERATIONS) -> int:
    """One cycle per decomposition step, per squaring and for the reciprocal."""
    x = float(x)
    return iterations + scaling_steps(x) + (1 if x < 0 else 0)
