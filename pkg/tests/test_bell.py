#! /usr/bin/env python
import itertools

import numpy as np
import pytest
from conftest import assert_dist_close, random_dist
from util4tests import assert_close, log, run_single_test

from pyqkdchain.bell import (
    BELL_SYMBOLS,
    PHI_00,
    BellDiagonal,
    BellSymbol,
    BellWord,
    bit_error_prob,
    bt_weight,
    convolve,
    convolve_all,
    parity_phase_error,
    ph_weight,
    phase_error_prob,
    symbol_add,
    word_add,
)
from pyqkdchain.noise import depolarizing_dist
from pyqkdchain.verify import enumerate_phase_error


def test_symbol_addition():
    log.info("test_symbol_addition")
    assert symbol_add(BellSymbol(0, 0), BellSymbol(1, 1)) == BellSymbol(1, 1)
    assert BellSymbol(1, 0) + BellSymbol(1, 1) == BellSymbol(0, 1)
    for a, b in itertools.product(BELL_SYMBOLS, repeat=2):
        assert symbol_add(a, b) == symbol_add(b, a)
        assert (a.bt ^ b.bt, a.ph ^ b.ph) == (
            symbol_add(a, b).bt,
            symbol_add(a, b).ph,
        )
    for a in BELL_SYMBOLS:
        assert a + a == PHI_00


def test_symbol_validation():
    log.info("test_symbol_validation")
    with pytest.raises(ValueError):
        BellSymbol(2, 0)
    with pytest.raises(ValueError):
        BellSymbol.from_index(4)
    assert BellSymbol.from_index(3) == BellSymbol(1, 1)
    assert [s.index for s in BELL_SYMBOLS] == [0, 1, 2, 3]


def test_word_add():
    log.info("test_word_add")
    w = BellWord.from_symbols([(0, 1), (1, 0)])
    assert w + w == BellWord.zeros(2)
    assert word_add(BellWord.zeros(2), w) == w
    a = BellWord.from_symbols([(1, 1), (0, 0)])
    expected = BellWord.from_symbols([(1, 0), (1, 0)])
    assert word_add(a, w) == expected
    with pytest.raises(ValueError):
        word_add(a, BellWord.zeros(3))


def test_weights():
    log.info("test_weights")
    w = BellWord.from_symbols([(0, 1), (0, 0), (1, 1)])
    assert_close(ph_weight(w), 2 / 3, 1e-15, "ph weight")
    assert ph_weight(BellWord.zeros(5)) == 0.0
    assert bt_weight(BellWord.from_symbols([(1, 0), (1, 1)])) == 1.0
    with pytest.raises(ValueError):
        BellWord([], [])


def test_sub_words():
    log.info("test_sub_words")
    w = BellWord.from_indices([0, 1, 2, 3, 1, 2])
    t = [4, 1, 1, 5]
    inside = w.sub_word(t)
    outside = w.complement_word(t)
    assert list(inside.indices) == [1, 1, 2]
    assert list(outside.indices) == [0, 2, 3]
    assert len(inside) + len(outside) == len(w)
    assert list(w.indices) == [0, 1, 2, 3, 1, 2], "sub-wording copies"
    with pytest.raises(IndexError):
        w.sub_word([6])


def test_distribution_validation():
    log.info("test_distribution_validation")
    with pytest.raises(ValueError):
        BellDiagonal([0.5, 0.5, 0.1, -0.1])
    with pytest.raises(ValueError):
        BellDiagonal([0.5, 0.5, 0.1])
    with pytest.raises(ValueError):
        BellDiagonal([0.5, 0.5, 0.1, 0.1])
    d = BellDiagonal.from_mapping({(0, 1): 0.25, (1, 1): 0.75})
    assert d[(1, 1)] == 0.75 and d[0] == 0.0


def test_convolve_examples():
    log.info("test_convolve_examples")
    delta_10 = BellDiagonal.delta((1, 0))
    delta_01 = BellDiagonal.delta((0, 1))
    assert convolve(delta_10, delta_01) == BellDiagonal.delta((1, 1))
    q = depolarizing_dist(0.1)
    assert_dist_close(convolve(BellDiagonal.delta(PHI_00), q), q)


def test_convolve_monoid(random_dists):
    log.info("test_convolve_monoid")
    neutral = BellDiagonal.delta(PHI_00)
    for p, q, r in zip(random_dists, random_dists[1:], random_dists[2:]):
        assert_dist_close(convolve(p, q), convolve(q, p))
        assert_dist_close(
            convolve(convolve(p, q), r), convolve(p, convolve(q, r))
        )
        assert_dist_close(convolve(neutral, p), p)
    assert convolve_all([]) == neutral


def test_phase_error_prob(random_dists):
    log.info("test_phase_error_prob")
    assert phase_error_prob(BellDiagonal.delta(PHI_00)) == 0.0
    assert phase_error_prob(BellDiagonal.uniform()) == 0.5
    for q in (0.0, 0.03, 0.4, 1.0):
        assert_close(phase_error_prob(depolarizing_dist(q)), q / 2, 1e-15)
        assert_close(bit_error_prob(depolarizing_dist(q)), q / 2, 1e-15)
    # xor parity law
    for p, q in zip(random_dists, random_dists[1:]):
        pp, pq = phase_error_prob(p), phase_error_prob(q)
        assert_close(
            phase_error_prob(convolve(p, q)),
            pp * (1 - pq) + pq * (1 - pp),
            1e-12,
            "parity marginal",
        )


def test_depolarizing_fold():
    log.info("test_depolarizing_fold")
    for q in (0.0, 0.01, 0.03, 0.1, 0.5):
        for n_links in range(1, 7):
            dists = [depolarizing_dist(q)] * n_links
            closed = (1 - (1 - q) ** n_links) / 2
            folded = phase_error_prob(convolve_all(dists))
            assert_close(folded, closed, 1e-12, f"fold {q=} {n_links=}")
            assert_close(enumerate_phase_error(dists), closed, 1e-12)
            assert_close(
                parity_phase_error([q / 2] * n_links), closed, 1e-12
            )


def test_heterogeneous_fold(rng):
    log.info("test_heterogeneous_fold")
    dists = [random_dist(rng) for _ in range(5)]
    expected = enumerate_phase_error(dists)
    assert_close(phase_error_prob(convolve_all(dists)), expected, 1e-12)
    assert_close(
        parity_phase_error([phase_error_prob(d) for d in dists]),
        expected,
        1e-12,
    )
    assert np.isclose(sum(convolve_all(dists)), 1.0, atol=1e-12)


if __name__ == "__main__":
    run_single_test(__file__)
