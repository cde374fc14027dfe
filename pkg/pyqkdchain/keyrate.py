"""Key-rate engine.

Entropy helpers, the finite-key rate of E91 over a partially corrupted
repeater chain, its asymptotic limit and the BB84 baselines that assume
a fully adversarial network. All logarithms are base two.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, FrozenSet, Tuple

import numpy as np
from scipy import optimize
from scipy.special import entr

from .sampling import (
    check_epsilon,
    check_sizes,
    delta_for_epsilon,
    delta_prime,
    epsilon_ledger,
)

log = logging.getLogger(__name__)

DEFAULT_EC_FACTOR = 1.2
DEFAULT_M_FRACTION = 0.07
DEFAULT_EPSILON = 1e-36
THRESHOLD_XTOL = 1e-7


class ClampFlag(Enum):
    ARG_CLAMPED_LOW = "arg_clamped_low"
    ARG_CLAMPED_HIGH = "arg_clamped_high"


def _check_unit(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value=}")


def _check_p_star(p_star: float) -> None:
    if not 0.0 <= p_star < 0.5:
        raise ValueError(
            f"noise parameter must lie in [0, 1/2), got {p_star=}; the "
            "bound is vacuous once 1 - 2p* is not positive"
        )


def binary_entropy(p: float) -> float:
    """h(p) = -p log p - (1-p) log(1-p), with 0 log 0 = 0"""
    _check_unit("p", p)
    return float((entr(p) + entr(1.0 - p)) / np.log(2.0))


def h_bar(p: float) -> float:
    """h(p) below 1/2, and 1 from there on (so non-decreasing on [0,1])"""
    _check_unit("p", p)
    return binary_entropy(p) if p < 0.5 else 1.0


@dataclass(frozen=True)
class RateParams:
    """Finite-key parameters.

    :param N: total number of rounds
    :param m: number of X-basis test rounds
    :param epsilon: user smoothing parameter
    :param ec_factor: error-correction inefficiency, >= 1
    :param p_star: (lower bound on) the honest noise parameter
    :param strict_leak: charge the error-correction leak per total round
      (without the (N-m)/N key-round fraction)
    """

    N: int
    m: int
    epsilon: float = DEFAULT_EPSILON
    ec_factor: float = DEFAULT_EC_FACTOR
    p_star: float = 0.0
    strict_leak: bool = False

    def __post_init__(self):
        check_sizes(self.m, self.N)
        check_epsilon(self.epsilon)
        _check_p_star(self.p_star)
        if self.ec_factor < 1.0:
            raise ValueError(f"ec_factor must be >= 1 {self.ec_factor=}")

    @property
    def n(self) -> int:
        return self.N - self.m

    @property
    def key_fraction(self) -> float:
        return (self.N - self.m) / self.N


def rate_params(
    N: int,
    m_fraction: float = DEFAULT_M_FRACTION,
    epsilon: float = DEFAULT_EPSILON,
    ec_factor: float = DEFAULT_EC_FACTOR,
    p_star: float = 0.0,
    strict_leak: bool = False,
) -> RateParams:
    """RateParams with m = round(m_fraction * N), at least 1"""
    if not 0.0 < m_fraction <= 0.5:
        raise ValueError(f"m_fraction must lie in (0, 1/2] {m_fraction=}")
    m = max(1, int(round(m_fraction * N)))
    return RateParams(int(N), m, epsilon, ec_factor, p_star, strict_leak)


@dataclass(frozen=True)
class RateReport:
    rate: float
    rate_clamped: float
    min_entropy_per_bit: float
    corrected_phase: float
    delta: float
    delta_prime: float
    leak_ec: float
    epsilon_pa: float
    epsilon_fail: float
    clamp_flags: FrozenSet[ClampFlag] = field(default_factory=frozenset)

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["clamp_flags"] = sorted(f.value for f in self.clamp_flags)
        return out


def corrected_phase(
    qx: float, p_star: float, delta: float, delta_prime: float
) -> Tuple[float, FrozenSet[ClampFlag]]:
    """The phase-error estimate on the key rounds after removing the
    honest noise: (qx - p* + delta')/(1 - 2p*) + delta, clamped to [0, 1].

    :return: the clamped value and the set of clamp flags raised
    :rtype: Tuple[float, FrozenSet[ClampFlag]]
    """
    _check_unit("qx", qx)
    _check_p_star(p_star)
    if delta < 0 or delta_prime < 0:
        raise ValueError(f"negative tolerance {delta=} {delta_prime=}")
    value = (qx - p_star + delta_prime) / (1.0 - 2.0 * p_star) + delta
    if value < 0.0:
        return 0.0, frozenset({ClampFlag.ARG_CLAMPED_LOW})
    if value > 1.0:
        return 1.0, frozenset({ClampFlag.ARG_CLAMPED_HIGH})
    return value, frozenset()


def finite_rate(qx_observed: float, params: RateParams) -> RateReport:
    """Finite-key rate per transmitted round.

    rate = (N-m)/N (1 - h̄(corrected)) - leak_EC - (1/N) log(1/eps)
    where leak_EC = ec_factor (N-m)/N h̄(qx + delta), or without the
    (N-m)/N fraction in strict-leak mode.

    :param qx_observed: observed X-basis error rate w(Q_X)
    :type qx_observed: float
    :param params: the finite-key parameters
    :type params: RateParams
    :return: the rate with all intermediate terms
    :rtype: RateReport
    """
    _check_unit("qx_observed", qx_observed)
    N, m, eps = params.N, params.m, params.epsilon
    delta = delta_for_epsilon(eps, m, N)
    d_prime = delta_prime(eps, m)
    corrected, flags = corrected_phase(
        qx_observed, params.p_star, delta, d_prime
    )
    min_entropy = 1.0 - h_bar(corrected)
    leak = params.ec_factor * h_bar(min(1.0, qx_observed + delta))
    if not params.strict_leak:
        leak *= params.key_fraction
    pa_cost = -math.log2(eps) / N
    rate = params.key_fraction * min_entropy - leak - pa_cost
    ledger = epsilon_ledger(eps)
    log.debug(
        f"finite rate {qx_observed=} {params=} -> {rate=} "
        f"({corrected=} {delta=} {d_prime=} {leak=})"
    )
    return RateReport(
        rate=rate,
        rate_clamped=max(0.0, rate),
        min_entropy_per_bit=min_entropy,
        corrected_phase=corrected,
        delta=delta,
        delta_prime=d_prime,
        leak_ec=leak,
        epsilon_pa=ledger.epsilon_pa,
        epsilon_fail=ledger.epsilon_fail,
        clamp_flags=flags,
    )


def key_length(report: RateReport, N: int) -> int:
    """number of secret bits extractable from N rounds at this rate"""
    return int(math.floor(N * report.rate_clamped))


def asymptotic_rate(qx: float, p_star: float) -> float:
    """1 - h̄((qx - p*)/(1 - 2p*)) - h(qx), the argument clamped to [0,1]"""
    arg, _ = corrected_phase(qx, p_star, 0.0, 0.0)
    return 1.0 - h_bar(arg) - binary_entropy(qx)


def bb84_nu(N: int, m: int, epsilon: float) -> float:
    """statistical correction sqrt(N (m+1) ln(2/eps) / (m^2 n)), n = N-m"""
    check_sizes(m, N)
    check_epsilon(epsilon)
    n = N - m
    return math.sqrt(
        N * (m + 1) * (math.log(2.0) - math.log(epsilon)) / (m**2 * n)
    )


def bb84_finite(
    qx: float,
    N: int,
    m: int,
    epsilon: float,
    ec_factor: float = DEFAULT_EC_FACTOR,
) -> float:
    """finite BB84 rate over a fully adversarial network, the error
    correction charged on the same h̄(qx + nu) term"""
    _check_unit("qx", qx)
    nu = bb84_nu(N, m, epsilon)
    h = h_bar(min(1.0, qx + nu))
    return (N - m) / N * (1.0 - h - ec_factor * h)


def bb84_asymptotic(qx: float) -> float:
    """1 - 2 h̄(qx)"""
    h = h_bar(qx)
    return 1.0 - h - h


def noise_tolerance(
    rate_fn: Callable[..., float], *args, xtol: float = THRESHOLD_XTOL
) -> float:
    """Largest observed error rate qx for which rate_fn(qx, *args) stays
    positive, found by bisection on [0, 1/2).

    :param rate_fn: rate as a function of qx, non-increasing on [0, 1/2)
    :param args: extra positional arguments passed to rate_fn
    :return: the threshold; 0.0 if the rate is not positive at qx = 0,
      and 0.5 if it never drops to zero below 1/2
    :rtype: float
    """

    def fn(qx: float) -> float:
        return float(rate_fn(qx, *args))

    high = 0.5 - 1e-12
    if fn(0.0) <= 0.0:
        return 0.0
    if fn(high) > 0.0:
        return 0.5
    result = optimize.root_scalar(
        fn, bracket=[0.0, high], method="bisect", xtol=xtol
    )
    log.debug(f"threshold for {rate_fn=} {args=}: {result.root=}")
    return float(result.root)
