import math
import numpy as np
import pytest
from core.metrics import INF_MARKER, format_psnr, fractions, is_non_decreasing, mean_finite_psnr, mean_psnr, mse, psnr
from core.scene import Frame
from utils.errors import DimensionMismatchError


def flat(value: float, size: int = 4) -> Frame:
    frame = Frame.empty(size, size)
    frame.color[:] = value
    return frame


def test_identical_frames_are_infinite():
    assert psnr(flat(0.3), flat(0.3)) == math.inf
    assert format_psnr(math.inf) == INF_MARKER


def test_black_against_white_is_zero_db():
    assert psnr(flat(0.0), flat(1.0)) == pytest.approx(0.0)


def test_offset_of_a_tenth_is_twenty_db():
    assert psnr(flat(0.2), flat(0.3)) == pytest.approx(20.0)
    assert format_psnr(20.0) == '20.0000'


def test_colors_are_clipped():
    assert mse(flat(1.5), flat(1.0)) == 0.0


def test_size_mismatch():
    with pytest.raises(DimensionMismatchError):
        psnr(flat(0.0, 4), flat(0.0, 5))


def test_mean_psnr_is_the_plain_mean():
    assert mean_psnr([20.0, 30.0]) == pytest.approx(25.0)
    assert mean_psnr([math.inf, 20.0, 30.0]) == math.inf
    assert math.isnan(mean_psnr([]))


def test_mean_finite_psnr_skips_infinite():
    assert mean_finite_psnr([math.inf, 20.0, 30.0]) == pytest.approx(25.0)
    assert mean_finite_psnr([math.inf, math.inf]) == math.inf
    assert math.isnan(mean_finite_psnr([]))


def test_fractions_sum_to_one():
    warped = np.array([[True, True], [False, False]])
    sparse = np.array([[False, False], [True, False]])
    void = np.array([[False, False], [False, True]])
    result = fractions(warped, sparse, void)
    assert result == {'warped_fraction': 0.5, 'disoccluded_fraction': 0.25,
        'void_fraction': 0.25}


def test_non_decreasing():
    assert is_non_decreasing([0.1, 0.2, 0.2, 0.5])
    assert not is_non_decreasing([0.3, 0.2])
    assert is_non_decreasing([0.3, 0.29], tolerance=0.02)
