"""Closed-form sampling bounds, their inversions and the epsilon ledger,
plus empirical and exhaustive estimates of the sampling failure
probability used to check them.

The sampled statistic is the relative phase weight of the test subset t
compared to that of the untested rest: a subset fails on word q when
|w(q_t^ph) - w(q_{-t}^ph)| > delta.
"""

import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np
from scipy.special import comb

from .bell import BellWord
from .rng import run_split

log = logging.getLogger(__name__)

EXHAUSTIVE_LIMIT = 2_000_000


@dataclass(frozen=True)
class SamplingParams:
    """N total rounds, m sampled test rounds, epsilon the user parameter"""

    N: int
    m: int
    epsilon: float

    def __post_init__(self):
        check_sizes(self.m, self.N)
        check_epsilon(self.epsilon)


@dataclass(frozen=True)
class EpsilonLedger:
    epsilon: float
    epsilon_pa: float
    epsilon_fail: float
    smoothing: float


def check_epsilon(epsilon: float) -> None:
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon=}")


def check_sizes(m: int, N: int, *, strict: bool = False) -> None:
    """validates 1 <= m <= N/2 (m < N/2 when strict) and N >= 2"""
    if N < 2:
        raise ValueError(f"need at least two rounds {N=}")
    if m < 1:
        raise ValueError(f"sample size must be positive {m=}")
    if 2 * m > N or (strict and 2 * m == N):
        bound = "m < N/2" if strict else "m <= N/2"
        raise ValueError(f"sample size violates {bound}: {m=} {N=}")


def epsilon_cl(delta: float, m: int, N: int, *, strict: bool = True) -> float:
    """Upper bound on the failure probability of the phase-weight sampling
    strategy, 2 exp(-delta^2 mN/(N+2)), capped at 1.

    :param delta: tolerance, > 0
    :param m: sample size
    :param N: total number of rounds
    :param strict: enforce m < N/2, the regime the bound is proven in;
      pass False to evaluate the same expression at m = N/2
    :return: the bound
    :rtype: float
    """
    if not delta > 0.0:
        raise ValueError(f"delta must be positive {delta=}")
    check_sizes(m, N, strict=strict)
    return min(1.0, 2.0 * math.exp(-(delta**2) * m * N / (N + 2)))


def delta_for_epsilon(epsilon: float, m: int, N: int) -> float:
    """delta = sqrt((N+2) ln(2/eps^2) / (mN)), the tolerance for which
    sqrt(epsilon_cl) equals epsilon"""
    params = SamplingParams(N, m, epsilon)
    # ln(2/eps^2) written out to avoid underflow of eps^2
    log_term = math.log(2.0) - 2.0 * math.log(params.epsilon)
    return math.sqrt((N + 2) * log_term / (m * N))


def delta_prime(epsilon: float, m: int) -> float:
    """delta' = sqrt(ln(2/eps) / (2m)), so that 2 exp(-2 delta'^2 m) = eps"""
    check_epsilon(epsilon)
    if m < 1:
        raise ValueError(f"sample size must be positive {m=}")
    return math.sqrt((math.log(2.0) - math.log(epsilon)) / (2.0 * m))


def epsilon_ledger(epsilon: float) -> EpsilonLedger:
    """The security parameters derived from the single user epsilon.

    :param epsilon: user smoothing parameter
    :return: epsilon_pa = 17 eps + 4 (2 eps)^(1/3),
      epsilon_fail = 2 (2 eps)^(1/3), smoothing = 8 eps + 2 (2 eps)^(1/3)
    :rtype: EpsilonLedger
    """
    check_epsilon(epsilon)
    cube = (2.0 * epsilon) ** (1.0 / 3.0)
    ledger = EpsilonLedger(
        epsilon=epsilon,
        epsilon_pa=17.0 * epsilon + 4.0 * cube,
        epsilon_fail=2.0 * cube,
        smoothing=8.0 * epsilon + 2.0 * cube,
    )
    worst = max(ledger.epsilon_pa, ledger.epsilon_fail, ledger.smoothing)
    if worst >= 1.0:
        raise ValueError(
            f"epsilon too large, derived security parameter {worst=} >= 1"
        )
    return ledger


def _failures(bits: np.ndarray, m: int, delta: float):
    """task counting failing uniformly drawn size-m subsets"""
    n_total = len(bits)
    weight = int(np.count_nonzero(bits))

    def task(rng: np.random.Generator, trials: int) -> int:
        count = 0
        for _ in range(trials):
            # Generator.choice without replacement is a partial shuffle
            t = rng.choice(n_total, size=m, replace=False)
            inside = int(np.count_nonzero(bits[t]))
            gap = abs(inside / m - (weight - inside) / (n_total - m))
            count += gap > delta
        return count

    return task


def _failure_frequency(bits, m, delta, trials, seed, workers) -> float:
    bits = np.asarray(bits, dtype=np.uint8)
    check_sizes(m, len(bits))
    counts = run_split(_failures(bits, m, delta), trials, seed, workers)
    return sum(counts) / trials


def empirical_failure(
    word: BellWord,
    m: int,
    delta: float,
    trials: int,
    seed: Optional[int] = None,
    workers: int = 1,
) -> float:
    """Monte-Carlo estimate of the failure probability of the phase-weight
    strategy on a fixed Bell word.

    :param word: the Bell word q of length N
    :param m: size of the uniformly drawn test subset
    :param delta: tolerance
    :param trials: number of drawn subsets
    :param seed: root seed
    :param workers: trials are split over this many sub-seeded workers
    :return: fraction of subsets t with |w(q_t^ph) - w(q_{-t}^ph)| > delta
    :rtype: float
    """
    return _failure_frequency(word.ph, m, delta, trials, seed, workers)


def empirical_failure_hw(
    bits, m: int, delta: float, trials: int, seed=None, workers: int = 1
) -> float:
    """same estimate for the Hamming-weight strategy on a bit string"""
    return _failure_frequency(bits, m, delta, trials, seed, workers)


def exhaustive_failure(word: BellWord, m: int, delta: float) -> float:
    """Exact failure probability by enumerating every size-m subset.

    Only feasible for small N (C(N, m) below EXHAUSTIVE_LIMIT).
    """
    n_total = len(word)
    check_sizes(m, n_total)
    n_subsets = int(comb(n_total, m, exact=True))
    if n_subsets > EXHAUSTIVE_LIMIT:
        raise ValueError(f"too many subsets to enumerate {n_subsets=}")
    ph = word.ph.astype(np.int64)
    subsets = np.fromiter(
        (i for t in combinations(range(n_total), m) for i in t),
        dtype=np.int64,
        count=n_subsets * m,
    ).reshape(n_subsets, m)
    inside = ph[subsets].sum(axis=1)
    weight = int(ph.sum())
    gaps = np.abs(inside / m - (weight - inside) / (n_total - m))
    return float(np.count_nonzero(gaps > delta)) / n_subsets


def hypergeometric_failure(weight: int, N: int, m: int, delta: float):
    """Exact failure probability for any word of phase weight count
    `weight`, summing the hypergeometric law of the count inside t."""
    check_sizes(m, N)
    total = comb(N, m, exact=True)
    failing = 0
    for k in range(max(0, m - (N - weight)), min(m, weight) + 1):
        if abs(k / m - (weight - k) / (N - m)) > delta:
            failing += comb(weight, k, exact=True) * comb(
                N - weight, m - k, exact=True
            )
    return failing / total
