#! /usr/bin/env python
import numpy as np
import pytest
from conftest import PRESET_QX, TEST_SEED, assert_dist_close
from util4tests import assert_close, binomial_sigma, log, run_single_test

from pyqkdchain.bell import BellWord, convolve_all
from pyqkdchain.montecarlo import (
    MAX_ROUNDS,
    ConcentrationSummary,
    TrialConfig,
    measure,
    raw_key_error_rate,
    sample_components,
    sample_round,
    sample_word,
    simulate_e91,
    verify_concentration,
    x_error_rate,
    zone_dists,
)
from pyqkdchain.noise import end_to_end_dist, observed_qx


def alternating_word(N: int) -> BellWord:
    """phase flips on every other round, weight 1/2"""
    ph = (np.arange(N) % 2).astype(np.uint8)
    return BellWord(np.zeros(N, dtype=np.uint8), ph)


def test_trial_config_validation(preset_chains):
    log.info("test_trial_config_validation")
    spec = preset_chains[4]
    with pytest.raises(ValueError):
        TrialConfig(spec, MAX_ROUNDS + 1, 10)
    with pytest.raises(ValueError):
        TrialConfig(spec, 100, 51)
    with pytest.raises(ValueError):
        TrialConfig(spec, 100, 10, trials=0)
    with pytest.raises(ValueError):
        TrialConfig(spec, 100, 10, epsilon=1.0)


def test_measure(rng):
    log.info("test_measure")
    disagree = rng.integers(0, 2, size=1000, dtype=np.uint8)
    alice, bob = measure(disagree, rng)
    assert np.array_equal(alice ^ bob, disagree)
    assert 0.4 < alice.mean() < 0.6


def test_error_rates_on_fixed_word():
    log.info("test_error_rates_on_fixed_word")
    word = BellWord.from_symbols([(0, 1), (1, 0), (1, 1), (0, 0)])
    t = np.array([0, 3])
    assert x_error_rate(word, t) == 0.5
    assert raw_key_error_rate(word, t) == 1.0


def test_sample_word_statistics(preset_chains, rng):
    log.info("test_sample_word_statistics")
    spec = preset_chains[2]
    n_rounds = 200_000
    word = sample_word(spec, n_rounds, rng)
    freqs = np.bincount(word.indices, minlength=4) / n_rounds
    expected = end_to_end_dist(spec).probs
    for s in range(4):
        sigma = binomial_sigma(expected[s], n_rounds)
        assert_close(freqs[s], expected[s], 5 * sigma, f"symbol {s}")
    with pytest.raises(ValueError):
        sample_word(spec, 0, rng)


def test_sample_round(preset_chains, rng):
    log.info("test_sample_round")
    spec = preset_chains[0]
    n_rounds = 4000
    flips = sum(sample_round(spec, rng).ph for _ in range(n_rounds))
    sigma = binomial_sigma(PRESET_QX, n_rounds)
    assert_close(flips / n_rounds, PRESET_QX, 5 * sigma, "round phase flips")


def test_zones(preset_chains, rng):
    log.info("test_zones")
    spec = preset_chains[4]
    left, middle, right = zone_dists(spec)
    assert_dist_close(
        convolve_all([left, middle, right]), end_to_end_dist(spec)
    )
    words = sample_components(spec, 50, rng)
    assert [len(w) for w in words] == [50, 50, 50]


def test_simulate_e91(preset_chains):
    log.info("test_simulate_e91")
    spec = preset_chains[4]
    cfg = TrialConfig(spec, 100_000, 7_000, seed=TEST_SEED)
    report = simulate_e91(cfg)
    assert_close(report.qx_analytic, PRESET_QX, 1e-12)
    sigma_x = binomial_sigma(PRESET_QX, 7_000)
    assert_close(report.qx_hat, PRESET_QX, 5 * sigma_x, "qx")
    sigma_z = binomial_sigma(report.qz_analytic, 93_000)
    assert_close(report.qz_hat, report.qz_analytic, 5 * sigma_z, "qz")
    assert report.rate_from_observation.rate < 1.0
    assert simulate_e91(cfg).to_dict() == report.to_dict()


def test_observed_rates_concentrate(preset_chains, quicktest):
    log.info("test_observed_rates_concentrate")
    spec = preset_chains[4]
    runs = 30 if quicktest else 100
    N = 10**5 if quicktest else 10**6
    m = 7 * N // 100
    sigma = binomial_sigma(observed_qx(spec), m)
    within = 0
    for seed in range(runs):
        report = simulate_e91(TrialConfig(spec, N, m, seed=seed))
        within += abs(report.qx_hat - report.qx_analytic) <= 3 * sigma
    # 99.7% expected, some slack for the finite number of runs
    assert within >= runs - 3, f"only {within=} of {runs=} within 3 sigma"


def test_injected_word(preset_chains):
    log.info("test_injected_word")
    spec = preset_chains[0]
    N = 10_000
    cfg = TrialConfig(spec, N, 500, seed=TEST_SEED)
    report = simulate_e91(cfg, injected_word=BellWord.zeros(N))
    assert report.qx_hat == 0.0 and report.qz_hat == 0.0
    assert report.sampling_violations == 0
    attacked = simulate_e91(cfg, injected_word=alternating_word(N))
    assert_close(attacked.qx_hat, 0.5, 5 * binomial_sigma(0.5, 500))
    with pytest.raises(ValueError):
        simulate_e91(cfg, injected_word=BellWord.zeros(N - 1))


def test_verify_concentration(preset_chains, quicktest):
    log.info("test_verify_concentration")
    trials = 50 if quicktest else 200
    cfg = TrialConfig(
        preset_chains[4], 10_000, 500, seed=TEST_SEED, trials=trials
    )
    for injected in (None, alternating_word(10_000)):
        summary = verify_concentration(
            cfg, 0.5, injected_word=injected, workers=2
        )
        assert summary.trials == trials
        assert summary.sampling_bound == 0.25
        assert summary.hoeffding_bound == 0.5
        assert summary.passed, f"{summary.to_dict()}"
    with pytest.raises(ValueError):
        verify_concentration(cfg, 0.5, injected_word=BellWord.zeros(10))


def test_concentration_is_reproducible(preset_chains):
    log.info("test_concentration_is_reproducible")
    cfg = TrialConfig(preset_chains[2], 2_000, 100, seed=5, trials=20)
    first = verify_concentration(cfg, 0.5, workers=3)
    assert verify_concentration(cfg, 0.5, workers=3) == first


def test_summary_allowance():
    log.info("test_summary_allowance")
    summary = ConcentrationSummary(
        trials=100,
        delta=0.1,
        delta_prime=0.05,
        sampling_violations=37,
        sampling_bound=0.25,
        hoeffding_violations=51,
        hoeffding_bound=0.5,
    )
    assert summary.sampling_pass  # 0.37 <= 0.25 + 3 * 0.0433
    assert summary.hoeffding_pass
    failing = ConcentrationSummary(100, 0.1, 0.05, 40, 0.25, 0, 0.5)
    assert not failing.sampling_pass and not failing.passed
    assert failing.to_dict()["passed"] is False


if __name__ == "__main__":
    run_single_test(__file__)
