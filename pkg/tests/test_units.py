import math

import numpy as np
import pytest

from utils.units import (
    db_to_linear,
    dbm_to_watts,
    linear_to_db,
    rate_to_sinr_threshold,
    sinr_to_rate,
    thermal_noise_w,
    watts_to_dbm
)


def test_db_conversions():
    assert db_to_linear(10.0) == pytest.approx(10.0)
    assert db_to_linear(-10.0) == pytest.approx(0.1)
    assert linear_to_db(100.0) == pytest.approx(20.0)
    assert linear_to_db(db_to_linear(6.5)) == pytest.approx(6.5)


def test_db_round_trip_over_full_range():
    grid = np.arange(-2000, 2001) / 10.0
    back = [linear_to_db(db_to_linear(x)) for x in grid]
    np.testing.assert_allclose(back, grid, rtol=1e-12, atol=0)
    dbm_back = [watts_to_dbm(dbm_to_watts(x)) for x in grid]
    np.testing.assert_allclose(dbm_back, grid, rtol=1e-12, atol=1e-12)


def test_linear_to_db_rejects_non_positive():
    with pytest.raises(ValueError):
        linear_to_db(0.0)


def test_dbm_conversions():
    assert dbm_to_watts(30.0) == pytest.approx(1.0)
    assert dbm_to_watts(0.0) == pytest.approx(1e-3)
    assert watts_to_dbm(1.0) == pytest.approx(30.0)


def test_thermal_noise_at_room_temperature():
    noise = thermal_noise_w(290.0, 50e6)
    assert noise == pytest.approx(2.0019e-13, rel=1e-3)
    assert watts_to_dbm(noise) == pytest.approx(-96.99, abs=0.01)


def test_rate_threshold_inverts_rate():
    bandwidth, h, j = 50e6, 0.17, 0.06
    theta = rate_to_sinr_threshold(20e6, bandwidth, h, j)
    assert float(sinr_to_rate(theta, bandwidth, h, j)) == pytest.approx(20e6, rel=1e-9)


def test_rate_threshold_edges():
    assert rate_to_sinr_threshold(0.0, 50e6, 0.17, 0.06) == 0.0
    assert math.isinf(rate_to_sinr_threshold(1e12, 50e6, 0.17, 0.06))
