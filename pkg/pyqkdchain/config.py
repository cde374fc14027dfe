"""JSON chain configuration files.

A chain config reads like::

    {
      "repeaters": 1,
      "honest_left": 0,
      "honest_right": 1,
      "links": [
        {"type": "depolarizing", "q": 0.03},
        {"type": "explicit", "probs": [0.97, 0.01, 0.01, 0.01]}
      ],
      "p_star_override": 0.01
    }
"""

import json
import logging
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError
from pydantic import field_validator, model_validator

from .noise import ChainSpec, DepolarizingNoise, ExplicitNoise, LinkNoise

log = logging.getLogger(__name__)

CONFIG_PROB_TOLERANCE = 1e-9


class ConfigError(ValueError):
    """Invalid chain configuration, locating the problem by key path
    (and by line for JSON syntax errors)."""

    def __init__(
        self,
        message: str,
        *,
        path: Optional[str] = None,
        key: Optional[str] = None,
        line: Optional[int] = None,
    ):
        self.path = path
        self.key = key
        self.line = line
        where = ":".join(str(p) for p in (path, line) if p is not None)
        if key:
            where = f"{where} [{key}]" if where else f"[{key}]"
        super().__init__(f"{where} {message}" if where else message)


class DepolarizingLink(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["depolarizing"]
    q: float = Field(ge=0.0, le=1.0)

    def to_noise(self) -> LinkNoise:
        return DepolarizingNoise(self.q)


class ExplicitLink(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["explicit"]
    probs: Tuple[float, float, float, float]

    @field_validator("probs")
    @classmethod
    def _is_distribution(cls, probs):
        if any(p < 0.0 for p in probs):
            raise ValueError("probabilities must be non-negative")
        if abs(sum(probs) - 1.0) > CONFIG_PROB_TOLERANCE:
            raise ValueError(
                f"probabilities must sum to 1 within "
                f"{CONFIG_PROB_TOLERANCE}, got {sum(probs)}"
            )
        return probs

    def to_noise(self) -> LinkNoise:
        probs = np.asarray(self.probs, dtype=np.float64)
        # renormalize into the tighter tolerance of BellDiagonal
        return ExplicitNoise(probs / probs.sum())


LinkConfig = Annotated[
    Union[DepolarizingLink, ExplicitLink], Field(discriminator="type")
]


class ChainConfigFile(BaseModel):
    """schema of a chain configuration document"""

    model_config = ConfigDict(extra="forbid")

    repeaters: int = Field(ge=0)
    honest_left: int = Field(default=0, ge=0)
    honest_right: int = Field(default=0, ge=0)
    links: List[LinkConfig]
    p_star_override: Optional[float] = Field(default=None, ge=0.0, lt=0.5)

    @model_validator(mode="after")
    def _topology(self):
        if len(self.links) != self.repeaters + 1:
            raise ValueError(
                f"need repeaters + 1 = {self.repeaters + 1} links, "
                f"got {len(self.links)}"
            )
        if self.honest_left + self.honest_right > self.repeaters:
            raise ValueError(
                f"honest_left + honest_right = "
                f"{self.honest_left + self.honest_right} exceeds "
                f"repeaters = {self.repeaters}"
            )
        return self

    def to_chain_spec(self) -> ChainSpec:
        return ChainSpec(
            self.repeaters,
            self.honest_left,
            self.honest_right,
            tuple(link.to_noise() for link in self.links),
            self.p_star_override,
        )


def _key_path(loc) -> str:
    return ".".join(str(part) for part in loc)


def parse_chain_config(data, path: Optional[str] = None) -> ChainSpec:
    """Validates an already decoded config document.

    :param data: the decoded JSON document
    :param path: (optional) source of the document, for error messages
    :return: the chain it describes
    :rtype: ChainSpec
    :raises ConfigError: on any schema violation, naming the first
      offending key
    """
    try:
        model = ChainConfigFile.model_validate(data)
    except ValidationError as ve:
        first = ve.errors()[0]
        key = _key_path(first["loc"])
        log.debug(f"config validation failed {path=} {ve.errors()=}")
        raise ConfigError(first["msg"], path=path, key=key) from ve
    return model.to_chain_spec()


def load_chain_config(path: Union[str, Path]) -> ChainSpec:
    """Reads and validates a JSON chain config file.

    :param path: location of the JSON file
    :type path: Union[str, Path]
    :return: the chain it describes
    :rtype: ChainSpec
    :raises ConfigError: if the file is unreadable, not JSON, or invalid
    """
    path = Path(path)
    log.debug(f"loading chain config from {path=}")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as oe:
        raise ConfigError(f"cannot read config: {oe}", path=str(path))
    try:
        data = json.loads(text)
    except json.JSONDecodeError as je:
        raise ConfigError(
            f"invalid JSON: {je.msg} (column {je.colno})",
            path=str(path),
            line=je.lineno,
        ) from je
    return parse_chain_config(data, path=str(path))


def dump_chain_config(spec: ChainSpec) -> dict:
    """the config document describing a chain spec"""
    doc = dict(
        repeaters=spec.repeaters,
        honest_left=spec.honest_left,
        honest_right=spec.honest_right,
        links=[link.as_config() for link in spec.links],
    )
    if spec.p_star_override is not None:
        doc["p_star_override"] = spec.p_star_override
    return doc
