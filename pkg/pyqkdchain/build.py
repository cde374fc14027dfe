import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .config import load_chain_config
from .noise import (
    ChainSpec,
    balanced_split,
    create_uniform_chain,
    link_noise_for_qx,
)

log = logging.getLogger(__name__)

PRESET_REPEATERS = 5
PRESET_Q = 0.03
PRESET_HONEST = (0, 2, 4)


def create_chain_spec(*chain_info) -> ChainSpec:
    """Creates a chain spec based on the passed non-None arguments.
    0 of those arguments yields the evaluation preset (5 repeaters, all
    links depolarizing with q = 3%, no honest repeaters),
    1 is taken as the path to a JSON chain config file.
    Anything beyond is unacceptable
    """
    chain_info = [
        el for el in chain_info if el is not None
    ]  # remove possible None values
    assert (
        len(chain_info) <= 1
    ), f"Too many arguments to create chain spec {chain_info=}"

    if len(chain_info) == 0:
        return create_uniform_chain(PRESET_REPEATERS, PRESET_Q)
    # else
    return load_chain_config(Path(chain_info[0]))


@dataclass(frozen=True)
class ChainFamily:
    """Chains sharing a topology, varied by link noise and honest count.

    With a base chain and no explicit q, the base links are kept and only
    the honest repeaters are re-split (balanced, left first). With an
    explicit q, identical depolarizing links are built on the same number
    of repeaters.
    """

    repeaters: int = PRESET_REPEATERS
    q: float = PRESET_Q
    base: Optional[ChainSpec] = None

    @classmethod
    def from_spec(cls, spec: ChainSpec, q: float = PRESET_Q):
        return cls(repeaters=spec.repeaters, q=q, base=spec)

    @property
    def links(self) -> int:
        return self.repeaters + 1

    def chain(self, honest: int, q: Optional[float] = None) -> ChainSpec:
        if honest > self.repeaters:
            raise ValueError(
                f"cannot make {honest=} repeaters honest out of "
                f"{self.repeaters}"
            )
        if q is None and self.base is not None:
            return self.base.with_honest(*balanced_split(honest))
        return create_uniform_chain(
            self.repeaters, self.q if q is None else q, honest
        )

    def chain_for_qx(self, qx: float, honest: int) -> ChainSpec:
        """identical-link chain whose X error rate is qx"""
        return self.chain(honest, link_noise_for_qx(qx, self.links))
