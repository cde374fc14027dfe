import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .bell import (
    PHI_00,
    BellDiagonal,
    convolve_all,
    parity_phase_error,
    phase_error_prob,
)

log = logging.getLogger(__name__)

NOISELESS = BellDiagonal.delta(PHI_00)


def depolarizing_dist(q: float) -> BellDiagonal:
    """Bell weights of the depolarizing channel (1 - q) rho + q/4 I
    applied to |phi_0^0>.

    :param q: depolarizing parameter in [0, 1]
    :type q: float
    :return: (1 - 3q/4, q/4, q/4, q/4)
    :rtype: BellDiagonal
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"depolarizing parameter out of range {q=}")
    return BellDiagonal((1.0 - 3.0 * q / 4.0, q / 4.0, q / 4.0, q / 4.0))


class LinkNoise(ABC):
    """Describes the natural (i.i.d.) noise on a single fiber link"""

    @property
    @abstractmethod
    def dist(self) -> BellDiagonal:
        """the Bell-diagonal distribution a single round of this link
        produces

        :rtype: BellDiagonal
        """
        pass  # pragma: no cover

    @abstractmethod
    def as_config(self) -> dict:
        """the json-able config entry describing this link"""
        pass  # pragma: no cover


class DepolarizingNoise(LinkNoise):
    def __init__(self, q: float):
        self._dist = depolarizing_dist(q)  # validates q
        self.q = float(q)

    @property
    def dist(self) -> BellDiagonal:
        return self._dist

    def as_config(self) -> dict:
        return {"type": "depolarizing", "q": self.q}

    def __repr__(self) -> str:
        return f"DepolarizingNoise({self.q=})"


class ExplicitNoise(LinkNoise):
    def __init__(self, dist: BellDiagonal | Sequence[float]):
        self._dist = (
            dist if isinstance(dist, BellDiagonal) else BellDiagonal(dist)
        )

    @property
    def dist(self) -> BellDiagonal:
        return self._dist

    def as_config(self) -> dict:
        return {"type": "explicit", "probs": self._dist.probs.tolist()}

    def __repr__(self) -> str:
        return f"ExplicitNoise({self._dist!r})"


@dataclass(frozen=True)
class ChainSpec:
    """Topology and noise of a repeater chain.

    Link 0 connects Alice to R_1, link c connects R_c to Bob. The first
    honest_left repeaters (next to Alice) and the last honest_right
    repeaters (next to Bob) are honest; the rest form the adversary's
    zone of control.
    """

    repeaters: int
    honest_left: int
    honest_right: int
    links: Tuple[LinkNoise, ...]
    p_star_override: Optional[float] = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        if self.repeaters < 0:
            raise ValueError(f"negative repeater count {self.repeaters=}")
        if self.honest_left < 0 or self.honest_right < 0:
            raise ValueError(
                f"negative honest counts {self.honest_left=} "
                f"{self.honest_right=}"
            )
        if self.honest_left + self.honest_right > self.repeaters:
            raise ValueError(
                f"more honest repeaters than repeaters: {self.honest_left=}"
                f" + {self.honest_right=} > {self.repeaters=}"
            )
        if len(self.links) != self.repeaters + 1:
            raise ValueError(
                f"need {self.repeaters + 1} links, got {len(self.links)}"
            )
        if self.p_star_override is not None and not (
            0.0 <= self.p_star_override < 0.5
        ):
            raise ValueError(
                f"noise parameter override out of [0, 1/2) "
                f"{self.p_star_override=}"
            )

    @property
    def link_dists(self) -> Tuple[BellDiagonal, ...]:
        return tuple(link.dist for link in self.links)

    @property
    def honest_links(self) -> int:
        return self.honest_left + self.honest_right

    def with_honest(self, honest_left: int, honest_right: int) -> "ChainSpec":
        """Same chain, different split of honest repeaters.

        The p* override bounds the configured honest sub-network only, it
        is dropped as soon as the split changes.
        """
        same_split = (honest_left, honest_right) == (
            self.honest_left,
            self.honest_right,
        )
        override = self.p_star_override if same_split else None
        if self.p_star_override is not None and not same_split:
            log.info(
                f"dropping {self.p_star_override=} for new split "
                f"{honest_left=} {honest_right=}"
            )
        return ChainSpec(
            self.repeaters,
            honest_left,
            honest_right,
            self.links,
            override,
        )


@dataclass(frozen=True)
class NoiseReport:
    end_to_end: BellDiagonal
    qx: float
    p_star: float
    p_left: BellDiagonal
    p_right: BellDiagonal


def balanced_split(honest: int) -> Tuple[int, int]:
    """splits a total honest count between left and right, left first"""
    return (honest + 1) // 2, honest // 2


def create_uniform_chain(
    repeaters: int,
    q: float,
    honest: int = 0,
    *,
    split: Optional[Tuple[int, int]] = None,
) -> ChainSpec:
    """Builds a chain of identical depolarizing(q) links.

    :param repeaters: number of repeaters c
    :param q: link-level depolarizing parameter
    :param honest: total number of honest repeaters
    :param split: (optional) explicit (honest_left, honest_right),
      takes precedence over honest, defaults to a balanced split of it
    """
    left, right = split if split is not None else balanced_split(honest)
    links = tuple(DepolarizingNoise(q) for _ in range(repeaters + 1))
    return ChainSpec(repeaters, left, right, links)


def end_to_end_dist(spec: ChainSpec) -> BellDiagonal:
    """distribution of the Alice-Bob Bell state after all honest swaps"""
    return convolve_all(spec.link_dists)


def observed_qx(spec: ChainSpec) -> float:
    """expected X-basis error rate w(Q_X) of the full chain"""
    return phase_error_prob(end_to_end_dist(spec))


def honest_marginals(spec: ChainSpec) -> Tuple[BellDiagonal, BellDiagonal]:
    """Composite distributions P_L and P_R of the honest sub-networks.

    With k_A honest repeaters next to Alice, the j = k_A links from Alice
    up to R_{k_A} are honest; the link leaving R_{k_A} towards the
    adversary is not counted. The right side mirrors this. An empty side
    yields the noiseless delta.

    :return: (P_L, P_R)
    :rtype: Tuple[BellDiagonal, BellDiagonal]
    """
    dists = spec.link_dists
    left = dists[: spec.honest_left]
    right = dists[len(dists) - spec.honest_right :]
    log.debug(f"honest marginals from {len(left)=} {len(right)=} links")
    return convolve_all(left), convolve_all(right)


def noise_parameter(spec: ChainSpec) -> float:
    """Noise parameter p* of the honest sub-network: the probability that
    exactly one of the left and right honest sides flips the phase,
    evaluated as the double sum over x, y with x.ph xor y.ph = 1 of
    P_L(x) P_R(y).
    """
    p_left, p_right = honest_marginals(spec)
    pl, pr = p_left.probs, p_right.probs
    # index & 1 is the ph component
    odd = np.array([[(x ^ y) & 1 for y in range(4)] for x in range(4)])
    return float(np.sum(np.outer(pl, pr) * odd))


def effective_noise_parameter(spec: ChainSpec) -> float:
    """p* as used for rates: the override if the chain carries one, and
    always 0 without honest repeaters"""
    if spec.honest_links == 0:
        return 0.0
    if spec.p_star_override is not None:
        return spec.p_star_override
    return noise_parameter(spec)


def honest_noise_parameter(honest_links: int, q: float) -> float:
    """p* for a total of honest_links identical depolarizing(q) links.

    Only valid for identical links, where the left/right split does not
    matter.
    """
    if honest_links < 0:
        raise ValueError(f"negative honest link count {honest_links=}")
    return parity_phase_error([q / 2.0] * honest_links)


def noise_report(spec: ChainSpec) -> NoiseReport:
    end = end_to_end_dist(spec)
    p_left, p_right = honest_marginals(spec)
    return NoiseReport(
        end_to_end=end,
        qx=phase_error_prob(end),
        p_star=effective_noise_parameter(spec),
        p_left=p_left,
        p_right=p_right,
    )


def chain_of(dists: Sequence[BellDiagonal], honest_left=0, honest_right=0):
    """chain spec from explicit per-link distributions"""
    return ChainSpec(
        len(dists) - 1,
        honest_left,
        honest_right,
        tuple(ExplicitNoise(d) for d in dists),
    )


def link_noise_for_qx(qx: float, links: int) -> float:
    """Depolarizing parameter q for which a chain of `links` identical
    links shows the X error rate qx, inverting (1 - (1 - q)^L) / 2."""
    if links < 1:
        raise ValueError(f"need at least one link {links=}")
    if not 0.0 <= qx <= 0.5:
        raise ValueError(f"X error rate out of [0, 1/2] {qx=}")
    return 1.0 - (1.0 - 2.0 * qx) ** (1.0 / links)
