"""Self-verification of every closed-form component against brute force:
density-matrix simulation, exhaustive enumeration and Monte Carlo.
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, List, Optional

import numpy as np

from .bell import (
    BELL_SYMBOLS,
    PHI_00,
    BellDiagonal,
    BellWord,
    convolve,
    parity_phase_error,
    phase_error_prob,
    symbol_add,
)
from .keyrate import asymptotic_rate, bb84_asymptotic, noise_tolerance
from .montecarlo import TrialConfig, simulate_e91, verify_concentration
from .noise import (
    chain_of,
    create_uniform_chain,
    depolarizing_dist,
    honest_marginals,
    noise_parameter,
    observed_qx,
)
from .oracle import (
    BELL_VECTORS,
    DensityMatrix,
    basis_disagreement,
    bell_swap,
    simulate_chain_exact,
)
from .rng import default_seed, make_generator
from .sampling import (
    delta_for_epsilon,
    delta_prime,
    epsilon_cl,
    exhaustive_failure,
)

log = logging.getLogger(__name__)

ORACLE_TOLERANCE = 1e-10
EXACT_TOLERANCE = 1e-12
ROUNDTRIP_RTOL = 1e-12
BB84_THRESHOLD = 0.110
MUTATIONS = ("convolve",)

Convolution = Callable[[BellDiagonal, BellDiagonal], BellDiagonal]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    seed: int
    mutate: Optional[str] = None
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        log.info(f"check {name}: {'pass' if passed else 'FAIL'} {detail}")
        self.checks.append(CheckResult(name, bool(passed), detail))

    def to_dict(self) -> dict:
        return dict(
            seed=self.seed,
            mutate=self.mutate,
            passed=self.passed,
            checks=[c.__dict__ for c in self.checks],
        )


def random_dist(rng: np.random.Generator) -> BellDiagonal:
    """a random distribution, uniform on the probability simplex"""
    return BellDiagonal(rng.dirichlet(np.ones(4)))


def _corrupted_convolve(p: BellDiagonal, q: BellDiagonal) -> BellDiagonal:
    # negative control: forgets the second link
    return p


def _fold(convolve_fn: Convolution, dists) -> BellDiagonal:
    return reduce(convolve_fn, dists, BellDiagonal.delta(PHI_00))


def check_oracle_equivalence(
    report: VerificationReport,
    rng: np.random.Generator,
    convolve_fn: Convolution = convolve,
    samples_per_length: int = 20,
) -> None:
    """exact chain simulation against the convolution fold, for every
    chain of one or two links and sampled chains of three and four links
    drawn from a pool of noiseless, depolarizing and random links"""
    pool = [BellDiagonal.delta(PHI_00)]
    pool += [depolarizing_dist(q) for q in (0.01, 0.05, 0.3)]
    pool += [random_dist(rng) for _ in range(10)]
    chains = [
        list(c) for n in (1, 2) for c in itertools.product(pool, repeat=n)
    ]
    for n_links in (3, 4):
        for _ in range(samples_per_length):
            picks = rng.integers(0, len(pool), size=n_links)
            chains.append([pool[i] for i in picks])
    worst = 0.0
    for links in chains:
        exact = simulate_chain_exact(links)
        folded = _fold(convolve_fn, links)
        worst = max(worst, float(np.max(np.abs(exact.probs - folded.probs))))
    report.add(
        "oracle_equivalence",
        worst <= ORACLE_TOLERANCE,
        f"{len(chains)} chains, max deviation {worst:.3g}",
    )

    links = [pool[i] for i in rng.integers(0, len(pool), size=4)]
    forward = simulate_chain_exact(links)
    backward = simulate_chain_exact(links, order=[3, 2, 1])
    report.add(
        "swap_order_independence",
        forward.isclose(backward, ORACLE_TOLERANCE),
        f"{forward!r} vs {backward!r}",
    )


def check_bell_swap_identity(report: VerificationReport) -> None:
    """|phi_a>|phi_b> swapped gives four equiprobable outcomes x, each
    leaving |phi_{a+b+x}> on the outer qubits"""
    failures = []
    for a, b in itertools.product(BELL_SYMBOLS, repeat=2):
        joint = DensityMatrix.from_pure(
            np.kron(BELL_VECTORS[a.index], BELL_VECTORS[b.index])
        )
        for branch in bell_swap(joint, (1, 2)):
            expected = symbol_add(symbol_add(a, b), branch.outcome)
            fidelity = branch.post_state.fidelity_pure(
                BELL_VECTORS[expected.index]
            )
            if (
                abs(branch.probability - 0.25) > ORACLE_TOLERANCE
                or fidelity < 1.0 - ORACLE_TOLERANCE
            ):
                failures.append(f"{a}+{b} -> {branch.outcome}")
    report.add("bell_swap_identity", not failures, ", ".join(failures))


def check_measurement_semantics(report: VerificationReport) -> None:
    """Z outcomes disagree with probability bt, X outcomes with ph"""
    deviation = max(
        max(
            abs(basis_disagreement(s, "Z") - s.bt),
            abs(basis_disagreement(s, "X") - s.ph),
        )
        for s in BELL_SYMBOLS
    )
    report.add(
        "measurement_semantics",
        deviation <= EXACT_TOLERANCE,
        f"max deviation {deviation:.3g}",
    )


def enumerate_phase_error(dists) -> float:
    """phase error of the XOR of one symbol per link, summing over all
    4^L symbol tuples"""
    n_links = len(dists)
    tuples = np.indices((4,) * n_links).reshape(n_links, -1)
    probs = np.ones(tuples.shape[1])
    parity = np.zeros(tuples.shape[1], dtype=np.int64)
    for k, dist in enumerate(dists):
        probs *= dist.probs[tuples[k]]
        parity ^= tuples[k] & 1
    return float(probs[parity == 1].sum())


def check_chain_noise(report: VerificationReport) -> None:
    worst = 0.0
    for q in (0.0, 0.01, 0.03, 0.1, 0.5):
        spec = create_uniform_chain(5, q)
        closed = (1.0 - (1.0 - q) ** 6) / 2.0
        enumerated = enumerate_phase_error(spec.link_dists)
        worst = max(
            worst,
            abs(observed_qx(spec) - closed),
            abs(enumerated - closed),
        )
    report.add(
        "closed_form_chain_noise",
        worst <= EXACT_TOLERANCE,
        f"max deviation {worst:.3g}",
    )


def check_noise_parameter(
    report: VerificationReport, rng: np.random.Generator, chains: int = 100
) -> None:
    """double-sum noise parameter against the parity closed form on
    random heterogeneous chains"""
    worst = 0.0
    zero_ok = True
    for _ in range(chains):
        repeaters = int(rng.integers(1, 7))
        honest = int(rng.integers(0, repeaters + 1))
        left = int(rng.integers(0, honest + 1))
        dists = [random_dist(rng) for _ in range(repeaters + 1)]
        spec = chain_of(dists, left, honest - left)
        p_left, p_right = (phase_error_prob(d) for d in honest_marginals(spec))
        closed = parity_phase_error([p_left, p_right])
        worst = max(worst, abs(noise_parameter(spec) - closed))
        zero_ok &= noise_parameter(chain_of(dists)) == 0.0
    report.add(
        "noise_parameter_double_sum",
        worst <= EXACT_TOLERANCE and zero_ok,
        f"max deviation {worst:.3g}, zero without honest: {zero_ok}",
    )


def check_sampling_roundtrips(report: VerificationReport) -> None:
    worst = 0.0
    for eps in np.logspace(-40, -2, 39):
        for m, N in ((70, 10**3), (700, 10**4), (7 * 10**5, 10**7)):
            delta = delta_for_epsilon(eps, m, N)
            bound = epsilon_cl(delta, m, N)
            hoeffding = 2.0 * np.exp(-2.0 * delta_prime(eps, m) ** 2 * m)
            worst = max(
                worst,
                abs(bound - eps**2) / eps**2,
                abs(hoeffding - eps) / eps,
            )
    report.add(
        "sampling_roundtrips",
        worst <= ROUNDTRIP_RTOL,
        f"max relative deviation {worst:.3g}",
    )


def check_concentration(
    report: VerificationReport, seed: int, trials: int
) -> None:
    """sampling failures stay below the closed-form bound: exhaustively
    for a worst-case word at N=20, by Monte Carlo on chain noise and on
    an injected worst-case word at N=10^4"""
    word = BellWord([0] * 20, [0, 1] * 10)
    delta = 0.5
    exact = exhaustive_failure(word, 10, delta)
    bound = epsilon_cl(delta, 10, 20, strict=False)
    report.add(
        "sampling_bound_exhaustive",
        exact <= bound,
        f"failure {exact:.4g} <= bound {bound:.4g}",
    )

    N, m, eps = 10**4, 500, 0.5
    spec = create_uniform_chain(5, 0.03, honest=4)
    cfg = TrialConfig(spec, N, m, seed=seed, trials=trials)
    alternating = BellWord([0] * N, [0, 1] * (N // 2))
    for label, injected in (("chain", None), ("alternating", alternating)):
        summary = verify_concentration(cfg, eps, injected_word=injected)
        report.add(
            f"concentration_{label}",
            summary.passed,
            f"sampling {summary.sampling_frequency:.4g} vs "
            f"{summary.sampling_bound:.4g}, hoeffding "
            f"{summary.hoeffding_frequency:.4g} vs "
            f"{summary.hoeffding_bound:.4g}",
        )


def check_bb84_reduction(report: VerificationReport) -> None:
    grid = np.round(np.arange(0.0, 0.49 + 1e-9, 0.001), 3)
    exact = all(asymptotic_rate(q, 0.0) == bb84_asymptotic(q) for q in grid)
    ours = noise_tolerance(asymptotic_rate, 0.0)
    bb84 = noise_tolerance(bb84_asymptotic)
    close = abs(ours - BB84_THRESHOLD) <= 1e-4 and abs(bb84 - ours) <= 1e-6
    report.add(
        "bb84_reduction",
        exact and close,
        f"exact on grid: {exact}, thresholds {ours:.6f} / {bb84:.6f}",
    )


def check_determinism(report: VerificationReport, seed: int) -> None:
    cfg = TrialConfig(create_uniform_chain(5, 0.03, 2), 10**4, 700, seed)
    same = simulate_e91(cfg) == simulate_e91(cfg)
    report.add("simulation_determinism", same)


def run_verification(
    seed: Optional[int] = None,
    mutate: Optional[str] = None,
    mc_trials: int = 2000,
) -> VerificationReport:
    """Runs the full check suite.

    :param seed: root seed of every random choice, defaults to the
      configured default seed
    :param mutate: (optional) name of a component to corrupt on purpose,
      "convolve" replaces the convolution by a broken one
    :param mc_trials: number of Monte-Carlo trials per concentration check
    :return: the report, passed only if every check passed
    :rtype: VerificationReport
    """
    if mutate is not None and mutate not in MUTATIONS:
        raise ValueError(f"unknown mutation {mutate=}, know {MUTATIONS}")
    seed = default_seed() if seed is None else seed
    rng = make_generator(seed)
    convolve_fn = _corrupted_convolve if mutate == "convolve" else convolve
    report = VerificationReport(seed=seed, mutate=mutate)

    check_oracle_equivalence(report, rng, convolve_fn)
    check_bell_swap_identity(report)
    check_measurement_semantics(report)
    check_chain_noise(report)
    check_noise_parameter(report, rng)
    check_sampling_roundtrips(report)
    check_concentration(report, seed, mc_trials)
    check_bb84_reduction(report)
    check_determinism(report, seed)
    log.info(f"verification {seed=} {mutate=} -> {report.passed=}")
    return report
