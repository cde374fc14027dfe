"""Parameter sweeps producing the CSV tables of noise, finite-key rates
and asymptotic rates as functions of link noise q, observed error rate
qx or the number of rounds N.
"""

import csv
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, TextIO, Tuple

import numpy as np

from .bell import phase_error_prob
from .build import PRESET_HONEST, ChainFamily
from .keyrate import (
    DEFAULT_EC_FACTOR,
    DEFAULT_EPSILON,
    DEFAULT_M_FRACTION,
    asymptotic_rate,
    bb84_asymptotic,
    bb84_finite,
    bb84_nu,
    finite_rate,
    noise_tolerance,
    rate_params,
)
from .noise import (
    ChainSpec,
    effective_noise_parameter,
    end_to_end_dist,
    noise_parameter,
)
from .sampling import (
    delta_for_epsilon,
    delta_prime,
    epsilon_cl,
    epsilon_ledger,
)

log = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 12
THRESHOLD_LABEL = "threshold"
VARIABLES = ("q", "qx", "N")

Row = Dict[str, object]


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep and the parameters held fixed.

    :param variable: one of "q" (link noise), "qx" (observed X error
      rate) or "N" (number of rounds)
    :param values: the sweep points, in output order
    """

    variable: str
    values: Tuple[float, ...]
    N: int = 10**8
    m_fraction: float = DEFAULT_M_FRACTION
    epsilon: float = DEFAULT_EPSILON
    ec_factor: float = DEFAULT_EC_FACTOR
    strict_leak: bool = False
    honest: Tuple[int, ...] = field(default=PRESET_HONEST)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "honest", tuple(self.honest))
        if self.variable not in VARIABLES:
            raise ValueError(f"cannot sweep over {self.variable=}")
        if not self.values:
            raise ValueError("a sweep needs at least one value")
        if any(h < 0 for h in self.honest):
            raise ValueError(f"negative honest count in {self.honest=}")
        for v in self.values:
            _check_point(self.variable, v)

    @classmethod
    def from_range(
        cls, variable: str, start: float, stop: float, steps: int, **fixed
    ) -> "SweepSpec":
        """Sweep of `steps` points from start to stop (inclusive), evenly
        spaced for q and qx, log-spaced integers for N."""
        if steps < 1:
            raise ValueError(f"need a positive number of steps {steps=}")
        if variable == "N":
            points = np.geomspace(start, stop, steps)
            values = tuple(dict.fromkeys(int(round(v)) for v in points))
        else:
            values = tuple(float(v) for v in np.linspace(start, stop, steps))
        return cls(variable, values, **fixed)

    def rate_params_for(self, N: int, p_star: float):
        return rate_params(
            N,
            self.m_fraction,
            self.epsilon,
            self.ec_factor,
            p_star,
            self.strict_leak,
        )


def _check_point(variable: str, value) -> None:
    if variable == "q" and not 0.0 <= value <= 1.0:
        raise ValueError(f"link noise out of [0, 1] {value=}")
    if variable == "qx" and not 0.0 <= value < 0.5:
        raise ValueError(f"X error rate out of [0, 1/2) {value=}")
    if variable == "N" and (int(value) != value or value < 2):
        raise ValueError(f"number of rounds must be an integer >= 2 {value=}")


def _chain_at(family: ChainFamily, variable: str, x, honest: int):
    if variable == "q":
        return family.chain(honest, float(x))
    if variable == "qx":
        return family.chain_for_qx(float(x), honest)
    return family.chain(honest)


def _qx_and_p_star(chain: ChainSpec) -> Tuple[float, float]:
    return (
        phase_error_prob(end_to_end_dist(chain)),
        effective_noise_parameter(chain),
    )


def evaluate_ordered(
    fn: Callable[[float], Row], values: Sequence, workers: int = 1
) -> List[Row]:
    """fn applied to every sweep point, rows in the order of values"""
    if workers <= 1:
        return [fn(v) for v in values]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, values))


def noise_table(
    family: ChainFamily,
    values: Sequence[float],
    honest: Sequence[int] = PRESET_HONEST,
    workers: int = 1,
) -> Tuple[List[str], List[Row]]:
    """qx of the full chain and p* per honest count, over link noise q

    :return: header (q, qx_total, p_star_h<k>...) and rows
    """
    header = ["q", "qx_total"] + [f"p_star_h{h}" for h in honest]

    def row(q: float) -> Row:
        _check_point("q", q)
        out: Row = {"q": q}
        # the honest split does not change the links
        out["qx_total"] = phase_error_prob(end_to_end_dist(family.chain(0, q)))
        for h in honest:
            out[f"p_star_h{h}"] = noise_parameter(family.chain(h, q))
        return out

    return header, evaluate_ordered(row, values, workers)


def _finite_point(sweep: SweepSpec, family: ChainFamily, x, h: int):
    chain = _chain_at(family, sweep.variable, x, h)
    N = int(x) if sweep.variable == "N" else sweep.N
    qx, p_star = _qx_and_p_star(chain)
    if sweep.variable == "qx":
        qx = float(x)
    params = sweep.rate_params_for(N, p_star)
    return qx, params


def _finite_ours(sweep, family, h):
    def rate(x) -> float:
        qx, params = _finite_point(sweep, family, x, h)
        return finite_rate(qx, params).rate

    return rate


def _finite_bb84(sweep, family):
    def rate(x) -> float:
        qx, params = _finite_point(sweep, family, x, 0)
        return bb84_finite(
            qx, params.N, params.m, params.epsilon, params.ec_factor
        )

    return rate


def _asymptotic_ours(sweep, family, h):
    def rate(x) -> float:
        chain = _chain_at(family, sweep.variable, x, h)
        qx, p_star = _qx_and_p_star(chain)
        if sweep.variable == "qx":
            qx = float(x)
        return asymptotic_rate(qx, p_star)

    return rate


def _asymptotic_bb84(sweep, family):
    def rate(x) -> float:
        if sweep.variable == "qx":
            return bb84_asymptotic(float(x))
        qx, _ = _qx_and_p_star(_chain_at(family, sweep.variable, x, 0))
        return bb84_asymptotic(qx)

    return rate


def _threshold_row(sweep: SweepSpec, curves, clamped: bool) -> Row:
    """zero crossing of every curve, in units of the sweep variable"""
    row: Row = {sweep.variable: THRESHOLD_LABEL}
    for name, fn in curves.items():
        row[name] = noise_tolerance(fn)
        if clamped:
            row[f"{name}_clamped"] = row[name]
    return row


def _rate_table(sweep, curves, clamped, workers, with_threshold):
    header = [sweep.variable] + list(curves)
    if clamped:
        header += [f"{name}_clamped" for name in curves]

    def row(x) -> Row:
        out: Row = {sweep.variable: x}
        for name, fn in curves.items():
            out[name] = fn(x)
            if clamped:
                out[f"{name}_clamped"] = max(0.0, out[name])
        return out

    rows = evaluate_ordered(row, sweep.values, workers)
    if with_threshold and sweep.variable != "N":
        rows.append(_threshold_row(sweep, curves, clamped))
    return header, rows


def finite_rate_table(
    sweep: SweepSpec,
    family: ChainFamily,
    workers: int = 1,
    with_threshold: bool = True,
) -> Tuple[List[str], List[Row]]:
    """Finite-key rates per honest count next to the BB84-F baseline.

    Raw (possibly negative) rates are followed by their clamped copies.
    For q and qx sweeps a final threshold row holds each curve's zero
    crossing.
    """
    curves = {
        f"rate_h{h}": _finite_ours(sweep, family, h) for h in sweep.honest
    }
    curves["rate_bb84f"] = _finite_bb84(sweep, family)
    return _rate_table(sweep, curves, True, workers, with_threshold)


def asymptotic_rate_table(
    sweep: SweepSpec,
    family: ChainFamily,
    workers: int = 1,
    with_threshold: bool = True,
) -> Tuple[List[str], List[Row]]:
    """Asymptotic rates per honest count next to the BB84-A baseline"""
    if sweep.variable == "N":
        raise ValueError("asymptotic rates do not depend on N")
    curves = {
        f"rate_h{h}": _asymptotic_ours(sweep, family, h)
        for h in sweep.honest
    }
    curves["rate_bb84a"] = _asymptotic_bb84(sweep, family)
    return _rate_table(sweep, curves, False, workers, with_threshold)


def bounds_table(
    values: Sequence[int],
    m_fraction: float = DEFAULT_M_FRACTION,
    epsilon: float = DEFAULT_EPSILON,
) -> Tuple[List[str], List[Row]]:
    """the statistical tolerances and security parameters per N"""
    header = [
        "N",
        "m",
        "epsilon",
        "delta",
        "delta_prime",
        "nu",
        "epsilon_cl",
        "epsilon_pa",
        "epsilon_fail",
        "smoothing",
    ]
    ledger = epsilon_ledger(epsilon)
    rows = []
    for N in values:
        params = rate_params(int(N), m_fraction, epsilon)
        delta = delta_for_epsilon(epsilon, params.m, params.N)
        rows.append(
            {
                "N": params.N,
                "m": params.m,
                "epsilon": epsilon,
                "delta": delta,
                "delta_prime": delta_prime(epsilon, params.m),
                "nu": bb84_nu(params.N, params.m, epsilon),
                "epsilon_cl": epsilon_cl(
                    delta, params.m, params.N, strict=False
                ),
                "epsilon_pa": ledger.epsilon_pa,
                "epsilon_fail": ledger.epsilon_fail,
                "smoothing": ledger.smoothing,
            }
        )
    return header, rows


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.{SIGNIFICANT_DIGITS}g}"
    return str(value)


def write_csv(
    header: Sequence[str], rows: Sequence[Row], out: Optional[TextIO] = None
) -> None:
    """Writes the table as CSV, header row first, numbers with 12
    significant digits.

    :param out: (optional) text stream, defaults to stdout
    """
    out = out if out is not None else sys.stdout
    writer = csv.DictWriter(out, fieldnames=list(header), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: format_value(v) for k, v in row.items()})
    log.debug(f"wrote csv with {len(header)=} columns and {len(rows)=}")
