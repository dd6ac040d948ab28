"""
Image quality and per-frame fraction metrics.
"""
from typing import Dict, Iterable, Sequence
import math
import numpy as np
from core.scene import Frame
from utils.errors import DimensionMismatchError

INF_MARKER = 'INF'


def mse(a: Frame, b: Frame) -> float:
    if a.color.shape != b.color.shape:
        raise DimensionMismatchError(
            f'Frames differ in size: {a.width}x{a.height} vs {b.width}x{b.height}'
            )
    diff = np.clip(a.color, 0.0, 1.0) - np.clip(b.color, 0.0, 1.0)
    return float(np.mean(diff * diff))


def psnr(a: Frame, b: Frame) -> float:
    """
    10 * log10(1 / MSE) over colour channels in [0, 1].

    Identical frames give ``math.inf``; ``format_psnr`` writes it as INF.

    Raises:
        DimensionMismatchError: The frames differ in size.
    """
    error = mse(a, b)
    if error == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / error)


def format_psnr(value: float) -> str:
    return INF_MARKER if math.isinf(value) else f'{value:.4f}'


def mean_psnr(values: Iterable[float]) -> float:
    """Arithmetic mean in dB; INF as soon as one value is INF, nan if empty."""
    values = list(values)
    if not values:
        return math.nan
    return float(np.mean(values))


def mean_finite_psnr(values: Iterable[float]) -> float:
    """Mean over the finite values only; INF if every value is INF."""
    values = list(values)
    finite = [v for v in values if not math.isinf(v)]
    if not values:
        return math.nan
    if not finite:
        return math.inf
    return float(np.mean(finite))


def mask_fraction(mask: np.ndarray) -> float:
    mask = np.asarray(mask, dtype=bool)
    return float(mask.mean()) if mask.size else 0.0


def fractions(warped: np.ndarray, disoccluded: np.ndarray, void: np.ndarray
    ) -> Dict[str, float]:
    """Warped, disoccluded and void fractions of one frame; they sum to 1."""
    return {'warped_fraction': mask_fraction(warped),
        'disoccluded_fraction': mask_fraction(disoccluded), 'void_fraction':
        mask_fraction(void)}


def is_non_decreasing(values: Sequence[float], tolerance: float = 0.0) -> bool:
    return all(b >= a - tolerance for a, b in zip(values, values[1:]))
