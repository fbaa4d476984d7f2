import math

import numpy as np
import pytest

from funkhilbert.errors import BadKError, BadNError, OutsideError
from funkhilbert.finsler import FUNK, HILBERT
from funkhilbert.measure import (
    ball_volume_profile,
    bishop_gromov_check,
    corollary_K,
    forward_ball_volume,
    model_volume,
)


def test_corollary_K_values():
    assert corollary_K(FUNK, 2, 4) == pytest.approx(-1.375)
    assert corollary_K(HILBERT, 2, 4) == pytest.approx(-5.5)
    assert corollary_K(FUNK, 3, math.inf) == -0.5


def test_model_volume_closed_form():
    # N = 2: int_0^r sinh(k t) dt = (cosh(k r) - 1) / k
    k = 1.3
    assert model_volume(0.7, -k * k, 2.0) == pytest.approx((math.cosh(k * 0.7) - 1) / k, rel=1e-10)


def test_zero_radius(disk):
    assert forward_ball_volume(FUNK, disk, [0, 0], 0.0).value == 0.0


@pytest.mark.parametrize("r", [0.5, 1.0])
def test_disk_ball_volumes_mc(disk, r):
    f = forward_ball_volume(FUNK, disk, [0, 0], r, samples=100_000, seed=2)
    h = forward_ball_volume(HILBERT, disk, [0, 0], r, samples=100_000, seed=2)
    assert abs(f.value - math.pi * (1 - math.exp(-r)) ** 2) <= 4 * f.std_error
    assert abs(h.value - math.pi * math.tanh(r) ** 2) <= 4 * h.std_error


def test_grid_method(disk):
    est = forward_ball_volume(HILBERT, disk, [0, 0], 1.0, method="grid", samples=160_000)
    assert est.std_error > 0
    assert est.value == pytest.approx(math.pi * math.tanh(1.0) ** 2, abs=max(3 * est.std_error, 1e-3))


def test_profile_monotone_and_seeded(ellipse):
    radii = [0.2, 0.5, 1.0, 2.0]
    a = ball_volume_profile(FUNK, ellipse, [0.3, 0.2], radii, samples=20_000, seed=9)
    b = ball_volume_profile(FUNK, ellipse, [0.3, 0.2], radii, samples=20_000, seed=9)
    assert [e.value for e in a] == [e.value for e in b]
    assert all(x.value <= y.value for x, y in zip(a, a[1:]))


def test_errors(disk):
    with pytest.raises(OutsideError):
        forward_ball_volume(FUNK, disk, [1.5, 0], 1.0)
    with pytest.raises(BadNError):
        bishop_gromov_check(FUNK, disk, [0, 0], 2, -1.0, [0.5, 1.0])
    with pytest.raises(BadKError):
        bishop_gromov_check(FUNK, disk, [0, 0], 4, 0.5, [0.5, 1.0])


def test_bishop_gromov_disk(disk):
    rep = bishop_gromov_check(HILBERT, disk, [0, 0], 4, corollary_K(HILBERT, 2, 4),
                              [0.25 * k for k in range(1, 9)], samples=50_000)
    assert rep["violations"] == []
    assert np.all(np.diff(rep["ratios"]) < 0)
