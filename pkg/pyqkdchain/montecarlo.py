"""Round-level Monte-Carlo simulation of E91 over a noisy repeater chain.

Rounds are i.i.d.: every link independently produces a Bell symbol from
its distribution and honest swapping XOR-folds them into the end-to-end
symbol. Measurements are modelled at the symbol level: in the X basis the
parties disagree iff ph = 1, in the Z basis iff bt = 1.

The chain is split into three zones: the honest links next to Alice, the
adversary's zone of control and the honest links next to Bob. An injected
word replaces the sampled contribution of the middle zone.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Tuple

import numpy as np

from .bell import (
    BELL_SYMBOLS,
    BellDiagonal,
    BellSymbol,
    BellWord,
    bit_error_prob,
    convolve_all,
)
from .keyrate import (
    DEFAULT_EC_FACTOR,
    DEFAULT_EPSILON,
    RateParams,
    RateReport,
    finite_rate,
)
from .noise import (
    ChainSpec,
    effective_noise_parameter,
    end_to_end_dist,
    noise_parameter,
    observed_qx,
)
from .rng import default_seed, make_generator, run_split
from .sampling import check_epsilon, check_sizes, delta_for_epsilon
from .sampling import delta_prime as hoeffding_delta

log = logging.getLogger(__name__)

MAX_ROUNDS = 10_000_000


@dataclass(frozen=True)
class TrialConfig:
    """Parameters of a simulated protocol run.

    :param spec: the chain to simulate
    :param rounds: number of rounds N
    :param sample_size: number of X-basis test rounds m
    :param seed: root seed, all randomness derives from it
    :param trials: number of independent runs (concentration checks)
    """

    spec: ChainSpec
    rounds: int
    sample_size: int
    seed: int = field(default_factory=default_seed)
    trials: int = 1
    epsilon: float = DEFAULT_EPSILON
    ec_factor: float = DEFAULT_EC_FACTOR
    strict_leak: bool = False

    def __post_init__(self):
        if self.rounds > MAX_ROUNDS:
            raise ValueError(
                f"too many rounds to materialize {self.rounds=} > "
                f"{MAX_ROUNDS}"
            )
        check_sizes(self.sample_size, self.rounds)
        check_epsilon(self.epsilon)
        if self.trials < 1:
            raise ValueError(f"need at least one trial {self.trials=}")


@dataclass(frozen=True)
class MCReport:
    rounds: int
    sample_size: int
    seed: int
    qx_hat: float
    qz_hat: float
    qx_analytic: float
    qz_analytic: float
    p_star: float
    sampling_violations: int
    rate_from_observation: RateReport

    def to_dict(self) -> dict:
        out = asdict(self)
        out["rate_from_observation"] = self.rate_from_observation.as_dict()
        return out


@dataclass(frozen=True)
class ConcentrationSummary:
    trials: int
    delta: float
    delta_prime: float
    sampling_violations: int
    sampling_bound: float
    hoeffding_violations: int
    hoeffding_bound: float

    @property
    def sampling_frequency(self) -> float:
        return self.sampling_violations / self.trials

    @property
    def hoeffding_frequency(self) -> float:
        return self.hoeffding_violations / self.trials

    @staticmethod
    def _allowed(bound: float, trials: int) -> float:
        return bound + 3.0 * math.sqrt(bound * (1.0 - bound) / trials)

    @property
    def sampling_pass(self) -> bool:
        allowed = self._allowed(self.sampling_bound, self.trials)
        return self.sampling_frequency <= allowed

    @property
    def hoeffding_pass(self) -> bool:
        allowed = self._allowed(self.hoeffding_bound, self.trials)
        return self.hoeffding_frequency <= allowed

    @property
    def passed(self) -> bool:
        return self.sampling_pass and self.hoeffding_pass

    def to_dict(self) -> dict:
        out = asdict(self)
        out.update(
            sampling_frequency=self.sampling_frequency,
            hoeffding_frequency=self.hoeffding_frequency,
            sampling_pass=self.sampling_pass,
            hoeffding_pass=self.hoeffding_pass,
            passed=self.passed,
        )
        return out


def _zones(spec: ChainSpec):
    dists = spec.link_dists
    right_start = len(dists) - spec.honest_right
    return (
        dists[: spec.honest_left],
        dists[spec.honest_left : right_start],
        dists[right_start:],
    )


def _sample_indices(
    dists, n_rounds: int, rng: np.random.Generator
) -> np.ndarray:
    """XOR-fold of one symbol index per link per round"""
    out = np.zeros(n_rounds, dtype=np.uint8)
    for dist in dists:
        out ^= rng.choice(4, size=n_rounds, p=dist.probs).astype(np.uint8)
    return out


def sample_components(
    spec: ChainSpec, n_rounds: int, rng: np.random.Generator
) -> Tuple[BellWord, BellWord, BellWord]:
    """Samples the per-zone contributions to n_rounds end-to-end symbols.

    :return: (left honest, adversary zone, right honest) words whose sum
      is the end-to-end word
    :rtype: Tuple[BellWord, BellWord, BellWord]
    """
    if n_rounds < 1:
        raise ValueError(f"need at least one round {n_rounds=}")
    return tuple(
        BellWord.from_indices(_sample_indices(zone, n_rounds, rng))
        for zone in _zones(spec)
    )


def sample_word(
    spec: ChainSpec, n_rounds: int, rng: np.random.Generator
) -> BellWord:
    """n_rounds i.i.d. end-to-end symbols of the chain as a BellWord"""
    if n_rounds < 1:
        raise ValueError(f"need at least one round {n_rounds=}")
    return BellWord.from_indices(
        _sample_indices(spec.link_dists, n_rounds, rng)
    )


def sample_round(spec: ChainSpec, rng: np.random.Generator) -> BellSymbol:
    """one end-to-end symbol: a draw per link, XOR-folded"""
    index = 0
    for dist in spec.link_dists:
        index ^= int(rng.choice(4, p=dist.probs))
    return BELL_SYMBOLS[index]


def measure(disagree: np.ndarray, rng: np.random.Generator):
    """Outcome bits of Alice and Bob measuring in a common basis.

    Alice's outcome is uniform; Bob's differs exactly where the relevant
    component of the round's symbol is 1.
    """
    alice = rng.integers(0, 2, size=len(disagree), dtype=np.uint8)
    return alice, alice ^ disagree


def x_error_rate(word: BellWord, t: np.ndarray) -> float:
    """w(Q_X): relative weight of the phase components over the rounds t"""
    return float(np.count_nonzero(word.ph[t])) / len(t)


def raw_key_error_rate(word: BellWord, t: np.ndarray) -> float:
    """relative weight of the bit-flip components outside the rounds t"""
    mask = np.ones(len(word), dtype=bool)
    mask[t] = False
    return float(np.count_nonzero(word.bt[mask])) / int(mask.sum())


def _sampling_gap(ph: np.ndarray, t: np.ndarray) -> float:
    n_total, m = len(ph), len(t)
    inside = int(np.count_nonzero(ph[t]))
    outside = int(np.count_nonzero(ph)) - inside
    return abs(inside / m - outside / (n_total - m))


def _end_to_end(spec, n_rounds, rng, injected_word) -> BellWord:
    left, middle, right = sample_components(spec, n_rounds, rng)
    if injected_word is not None:
        if len(injected_word) != n_rounds:
            raise ValueError(
                f"injected word has {len(injected_word)=}, need {n_rounds}"
            )
        middle = injected_word
    return left + middle + right


def simulate_e91(
    cfg: TrialConfig, injected_word: Optional[BellWord] = None
) -> MCReport:
    """Simulates a single E91 run over the chain.

    Draws N end-to-end symbols, a uniform size-m test subset t, measures
    the test rounds in X and the remaining rounds in Z, and feeds the
    observed X error rate into the finite-key rate.

    :param cfg: the run parameters
    :type cfg: TrialConfig
    :param injected_word: (optional) fixed word replacing the adversary
      zone's sampled contribution
    :type injected_word: BellWord
    :return: observed and analytic error rates plus the derived rate
    :rtype: MCReport
    """
    spec, N, m = cfg.spec, cfg.rounds, cfg.sample_size
    rng = make_generator(cfg.seed)
    word = _end_to_end(spec, N, rng, injected_word)
    t = np.sort(rng.choice(N, size=m, replace=False))
    key_rounds = np.setdiff1d(np.arange(N), t, assume_unique=True)

    alice_x, bob_x = measure(word.ph[t], rng)
    alice_z, bob_z = measure(word.bt[key_rounds], rng)
    qx_hat = float(np.count_nonzero(alice_x != bob_x)) / m
    qz_hat = float(np.count_nonzero(alice_z != bob_z)) / (N - m)

    delta = delta_for_epsilon(cfg.epsilon, m, N)
    violated = int(_sampling_gap(word.ph, t) > delta)
    p_star = effective_noise_parameter(spec)
    params = RateParams(
        N,
        m,
        cfg.epsilon,
        cfg.ec_factor,
        p_star=p_star,
        strict_leak=cfg.strict_leak,
    )
    report = MCReport(
        rounds=N,
        sample_size=m,
        seed=cfg.seed,
        qx_hat=qx_hat,
        qz_hat=qz_hat,
        qx_analytic=observed_qx(spec),
        qz_analytic=bit_error_prob(end_to_end_dist(spec)),
        p_star=p_star,
        sampling_violations=violated,
        rate_from_observation=finite_rate(qx_hat, params),
    )
    log.debug(f"simulated e91 {cfg.seed=} {N=} {m=} -> {qx_hat=} {qz_hat=}")
    return report


def _concentration_task(cfg, delta, d_prime, p_star, injected_word):
    spec, N, m = cfg.spec, cfg.rounds, cfg.sample_size

    def task(rng: np.random.Generator, trials: int) -> Tuple[int, int]:
        sampling = hoeffding = 0
        for _ in range(trials):
            left, middle, right = sample_components(spec, N, rng)
            if injected_word is not None:
                middle = injected_word
            word = left + middle + right
            t = rng.choice(N, size=m, replace=False)
            sampling += _sampling_gap(word.ph, t) > delta

            # honest parity y against the adversary-zone phases over t
            y = left.ph[t] ^ right.ph[t]
            x = float(np.count_nonzero(middle.ph[t])) / m
            expected = x * (1.0 - p_star) + (1.0 - x) * p_star
            observed = float(np.count_nonzero(y ^ middle.ph[t])) / m
            hoeffding += abs(observed - expected) > d_prime
        return sampling, hoeffding

    return task


def verify_concentration(
    cfg: TrialConfig,
    epsilon: float,
    injected_word: Optional[BellWord] = None,
    workers: int = 1,
) -> ConcentrationSummary:
    """Empirical check of both concentration steps behind the rate bound.

    Over cfg.trials independent runs it counts
    - sampling violations: |w(q_t^ph) - w(q_{-t}^ph)| > delta, with delta
      from delta_for_epsilon(epsilon, m, N), bounded by epsilon^2
    - Hoeffding violations: the test-round phase weight strays more than
      delta' from its mean given the adversary-zone phases, bounded by
      epsilon

    :param cfg: the run parameters (rounds, sample size, trials, seed)
    :type cfg: TrialConfig
    :param epsilon: the user smoothing parameter the tolerances derive from
    :type epsilon: float
    :param injected_word: (optional) fixed adversary-zone word, e.g. a
      worst-case word of phase weight 1/2
    :type injected_word: BellWord
    :param workers: number of sub-seeded workers the trials are split over
    :type workers: int
    :return: the violation counts with their bounds
    :rtype: ConcentrationSummary
    """
    check_epsilon(epsilon)
    N, m = cfg.rounds, cfg.sample_size
    if injected_word is not None and len(injected_word) != N:
        raise ValueError(f"injected word has {len(injected_word)=}, need {N}")
    delta = delta_for_epsilon(epsilon, m, N)
    d_prime = hoeffding_delta(epsilon, m)
    p_star = noise_parameter(cfg.spec)
    task = _concentration_task(cfg, delta, d_prime, p_star, injected_word)
    partials = run_split(task, cfg.trials, cfg.seed, workers)
    summary = ConcentrationSummary(
        trials=cfg.trials,
        delta=delta,
        delta_prime=d_prime,
        sampling_violations=int(sum(p[0] for p in partials)),
        sampling_bound=epsilon**2,
        hoeffding_violations=int(sum(p[1] for p in partials)),
        hoeffding_bound=epsilon,
    )
    log.info(f"concentration check {summary=}")
    return summary


def zone_dists(
    spec: ChainSpec,
) -> Tuple[BellDiagonal, BellDiagonal, BellDiagonal]:
    """composite distributions of the three zones, left to right"""
    return tuple(convolve_all(zone) for zone in _zones(spec))
