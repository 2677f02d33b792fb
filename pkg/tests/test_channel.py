import math

import mpmath
import numpy as np
import pytest

from spikebp.channel import (
    ChannelParams,
    codeword_rng,
    lc_for_design_point,
    sigma_from_ebn0,
    transmit_all_zero,
)


def test_sigma_unit_rate():
    assert sigma_from_ebn0(0.0, 1.0) == pytest.approx(1 / math.sqrt(2), rel=1e-15)


def test_sigma_design_point_high_precision():
    mpmath.mp.dps = 40
    rate = mpmath.mpf(30720) / 38400
    ref = mpmath.sqrt(1 / (2 * rate * mpmath.power(10, mpmath.mpf("0.28"))))
    assert sigma_from_ebn0(2.8, 0.8) == pytest.approx(float(ref), rel=1e-14)


@pytest.mark.parametrize("rate", [0.0, -0.1, 1.5])
def test_invalid_rate(rate):
    with pytest.raises(ValueError):
        sigma_from_ebn0(1.0, rate)
    with pytest.raises(ValueError):
        ChannelParams(1.0, rate)


def test_reliability_modes():
    matched = ChannelParams(2.0, 0.8)
    assert matched.reliability_mode == "matched"
    assert matched.lc == pytest.approx(2 / matched.sigma**2, rel=1e-14)
    fixed = ChannelParams(3.5, 0.8, design_ebn0_db=2.8)
    assert fixed.reliability_mode == "fixed"
    assert fixed.lc == lc_for_design_point(2.8, 0.8)
    assert fixed.lc == pytest.approx(2 / sigma_from_ebn0(2.8, 0.8) ** 2, rel=1e-14)
    assert fixed.sigma == sigma_from_ebn0(3.5, 0.8)


def test_transmit_deterministic_and_llr_exact():
    p = ChannelParams(1.0, 0.5)
    a = transmit_all_zero(1000, p, seed=7)
    b = transmit_all_zero(1000, p, seed=7)
    np.testing.assert_array_equal(a.y, b.y)
    np.testing.assert_array_equal(a.llr, a.y * p.lc)
    c = transmit_all_zero(1000, p, seed=codeword_rng(7, 1, 2))
    assert not np.array_equal(a.y, c.y)


def test_transmit_noise_statistics():
    p = ChannelParams(0.0, 1.0)
    w = transmit_all_zero(200_000, p, seed=3)
    noise = w.y - 1.0
    assert abs(noise.mean()) < 5 * p.sigma / math.sqrt(noise.size)
    assert noise.std() == pytest.approx(p.sigma, rel=0.01)


def test_transmit_rejects_empty():
    with pytest.raises(ValueError):
        transmit_all_zero(0, ChannelParams(0.0, 1.0))


def test_codeword_streams_independent():
    a = codeword_rng(0, 5, 1).standard_normal(4)
    b = codeword_rng(0, 5, 2).standard_normal(4)
    assert not np.array_equal(a, b)
    np.testing.assert_array_equal(a, codeword_rng(0, 5, 1).standard_normal(4))
