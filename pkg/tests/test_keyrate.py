#! /usr/bin/env python
import numpy as np
import pytest
from conftest import PRESET_QX
from util4tests import assert_close, log, run_single_test

from pyqkdchain.keyrate import (
    ClampFlag,
    RateParams,
    asymptotic_rate,
    bb84_asymptotic,
    bb84_finite,
    binary_entropy,
    corrected_phase,
    finite_rate,
    h_bar,
    key_length,
    noise_tolerance,
    rate_params,
)
from pyqkdchain.noise import noise_parameter

EPSILON = 1e-36


def preset_rates(N, preset_chains, **kwargs):
    """finite rates of the preset chains, keyed by honest count"""
    rates = {}
    for honest, spec in preset_chains.items():
        params = rate_params(N, p_star=noise_parameter(spec), **kwargs)
        rates[honest] = finite_rate(PRESET_QX, params).rate
    return rates


def test_entropy():
    log.info("test_entropy")
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert_close(binary_entropy(0.5), 1.0, 1e-15)
    assert_close(binary_entropy(0.11), 0.499916, 1e-6)
    assert_close(binary_entropy(0.3), binary_entropy(0.7), 1e-15)
    assert h_bar(0.7) == 1.0
    assert h_bar(0.5) == 1.0
    assert h_bar(0.2) == binary_entropy(0.2)
    for p in (-0.01, 1.01):
        with pytest.raises(ValueError):
            binary_entropy(p)


def test_corrected_phase_clamping():
    log.info("test_corrected_phase_clamping")
    value, flags = corrected_phase(0.0, 0.4, 0.0, 0.0)
    assert value == 0.0 and flags == {ClampFlag.ARG_CLAMPED_LOW}
    value, flags = corrected_phase(1.0, 0.4, 0.0, 0.0)
    assert value == 1.0 and flags == {ClampFlag.ARG_CLAMPED_HIGH}
    value, flags = corrected_phase(0.083514, 0.0573536, 0.0, 0.0)
    assert_close(value, 0.02955, 1e-5, "corrected phase")
    assert not flags
    with pytest.raises(ValueError):
        corrected_phase(0.1, 0.5, 0.0, 0.0)
    with pytest.raises(ValueError):
        corrected_phase(0.1, 0.0, -0.1, 0.0)


def test_rate_params():
    log.info("test_rate_params")
    params = rate_params(10**8)
    assert params.m == 7_000_000 and params.n == 93_000_000
    assert_close(params.key_fraction, 0.93, 1e-15)
    assert rate_params(10, m_fraction=0.01).m == 1
    with pytest.raises(ValueError):
        rate_params(100, m_fraction=0.6)
    with pytest.raises(ValueError):
        RateParams(100, 10, ec_factor=0.9)
    with pytest.raises(ValueError):
        RateParams(100, 10, p_star=0.5)
    with pytest.raises(ValueError):
        RateParams(100, 60)


def test_asymptotic_acceptance():
    log.info("test_asymptotic_acceptance")
    rate = asymptotic_rate(0.08351, 0.05735)
    assert_close(rate, 0.3934, 1e-3, "asymptotic rate")


def test_bb84_reduction():
    log.info("test_bb84_reduction")
    for qx in np.linspace(0.0, 0.49, 50):
        assert asymptotic_rate(float(qx), 0.0) == bb84_asymptotic(float(qx))


def test_bb84_threshold():
    log.info("test_bb84_threshold")
    threshold = noise_tolerance(bb84_asymptotic)
    assert_close(threshold, 0.110028, 1e-5, "bb84 threshold")


def test_threshold_sentinels():
    log.info("test_threshold_sentinels")
    assert noise_tolerance(lambda qx: -1.0) == 0.0
    assert noise_tolerance(lambda qx: 1.0) == 0.5
    assert_close(noise_tolerance(lambda qx, c: c - qx, 0.2), 0.2, 1e-6)


def test_preset_finite_rates(preset_chains):
    log.info("test_preset_finite_rates")
    rates = preset_rates(10**8, preset_chains)
    expected = {4: 0.236, 2: 0.127, 0: 0.040}
    for honest, value in expected.items():
        assert_close(rates[honest], value, 2e-3, f"{honest=}")
    bb84 = bb84_finite(PRESET_QX, 10**8, 7_000_000, EPSILON)
    assert_close(bb84, 0.057, 2e-3, "bb84 finite")
    assert rates[0] < bb84 < rates[2] < rates[4]


def test_honest_ordering(preset_chains):
    log.info("test_honest_ordering")
    for N in np.geomspace(1e5, 1e12, 15):
        N = int(N)
        rates = preset_rates(N, preset_chains)
        assert rates[4] > rates[2] > rates[0], f"ordering broken at {N=}"
        bb84 = bb84_finite(PRESET_QX, N, rate_params(N).m, EPSILON)
        assert rates[0] < bb84, f"untrusted chain beats bb84 at {N=}"
        for honest in (2, 4):
            if rates[honest] > 0 and bb84 > 0:
                assert rates[honest] > bb84, f"{honest=} below bb84 {N=}"


def test_rate_grows_with_rounds(preset_chains):
    log.info("test_rate_grows_with_rounds")
    previous = -np.inf
    for N in (10**6, 10**7, 10**8, 10**10, 10**12):
        rate = preset_rates(N, preset_chains)[4]
        assert rate > previous
        previous = rate


def test_rate_decreases_with_noise():
    log.info("test_rate_decreases_with_noise")
    qx_grid = [float(qx) for qx in np.linspace(0.0, 0.49, 50)]
    for p_star in (0.0, 0.01, 0.03, 0.1, 0.2, 0.4):
        params = rate_params(10**8, p_star=p_star)
        finite = [finite_rate(qx, params).rate for qx in qx_grid]
        limit = [asymptotic_rate(qx, p_star) for qx in qx_grid]
        for rates in (finite, limit):
            for a, b in zip(rates, rates[1:]):
                assert a >= b - 1e-12, f"{p_star=} {a=} {b=}"


def test_rate_grows_with_noise_parameter():
    log.info("test_rate_grows_with_noise_parameter")
    p_grid = [float(p) for p in np.linspace(0.0, 0.45, 50)]
    for qx in np.linspace(0.0, 0.4, 21):
        qx = float(qx)
        finite = [
            finite_rate(qx, rate_params(10**8, p_star=p)).rate
            for p in p_grid
        ]
        limit = [asymptotic_rate(qx, p) for p in p_grid]
        for rates in (finite, limit):
            for a, b in zip(rates, rates[1:]):
                assert b >= a - 1e-12, f"{qx=} {a=} {b=}"


def test_finite_converges_to_asymptotic(preset_chains):
    log.info("test_finite_converges_to_asymptotic")
    N = 10**12
    for honest, spec in preset_chains.items():
        p_star = noise_parameter(spec)
        params = rate_params(N, p_star=p_star, ec_factor=1.0)
        report = finite_rate(PRESET_QX, params)
        limit = params.key_fraction * asymptotic_rate(PRESET_QX, p_star)
        assert_close(report.rate, limit, 1e-3, f"{honest=}")


def test_strict_leak():
    log.info("test_strict_leak")
    relaxed = finite_rate(0.05, rate_params(10**8, p_star=0.02))
    strict = finite_rate(
        0.05, rate_params(10**8, p_star=0.02, strict_leak=True)
    )
    assert strict.rate < relaxed.rate
    assert_close(strict.leak_ec * 0.93, relaxed.leak_ec, 1e-12)


def test_rate_report():
    log.info("test_rate_report")
    report = finite_rate(0.45, rate_params(10**6, p_star=0.01))
    assert report.rate < 0 and report.rate_clamped == 0.0
    assert key_length(report, 10**6) == 0
    good = finite_rate(0.02, rate_params(10**8, p_star=0.01))
    assert key_length(good, 10**8) == int(np.floor(10**8 * good.rate))
    as_dict = good.as_dict()
    assert as_dict["clamp_flags"] == []
    assert_close(as_dict["epsilon_fail"], 2.52e-12, 1e-13)
    high = finite_rate(1.0, rate_params(10**6))
    assert high.corrected_phase == 1.0
    assert ClampFlag.ARG_CLAMPED_HIGH in high.clamp_flags
    assert high.min_entropy_per_bit == 0.0 and high.rate < 0
    assert "arg_clamped_high" in high.as_dict()["clamp_flags"]


if __name__ == "__main__":
    run_single_test(__file__)
