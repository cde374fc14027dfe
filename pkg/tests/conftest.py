import json
import os
from pathlib import Path
from typing import Dict, List

import numpy as np
import pytest
from util4tests import enable_test_logging, log

from pyqkdchain import BellDiagonal, ChainSpec, create_uniform_chain

TEST_INPUT_FOLDER = Path(__file__).parent / "./input"
TEST_SEED = 424242
PRESET_Q = 0.03
PRESET_QX = (1.0 - (1.0 - PRESET_Q) ** 6) / 2.0  # 5 repeaters, 6 links


enable_test_logging()  # note that this includes loading .env into os.getenv


def random_dist(rng: np.random.Generator) -> BellDiagonal:
    """random Bell-diagonal distribution, uniform on the simplex"""
    return BellDiagonal(rng.dirichlet(np.ones(4)))


def assert_dist_close(
    actual: BellDiagonal, expected: BellDiagonal, atol: float = 1e-12
):
    deviation = float(np.max(np.abs(actual.probs - expected.probs)))
    assert deviation <= atol, (
        f"distributions differ by {deviation=} > {atol=}: "
        f"{actual!r} vs {expected!r}"
    )


def write_config(tmp_path: Path, doc, name: str = "chain.json") -> Path:
    """dumps a config document (or raw text) into a temp file"""
    fpath = tmp_path / name
    text = doc if isinstance(doc, str) else json.dumps(doc, indent=2)
    fpath.write_text(text, encoding="utf-8")
    log.debug(f"wrote test config {fpath=}")
    return fpath


@pytest.fixture(scope="session")
def quicktest() -> bool:
    """bool setting indicating to skip lengthy tests
    setting driven by setting env variable "QUICKTEST" to anything but 0 or ""
    """
    return bool(os.getenv("QUICKTEST", 0))


@pytest.fixture()
def rng() -> np.random.Generator:
    """freshly seeded generator, identical for every test"""
    return np.random.default_rng(TEST_SEED)


@pytest.fixture()
def random_dists(rng) -> List[BellDiagonal]:
    """ten random Bell-diagonal distributions"""
    return [random_dist(rng) for _ in range(10)]


@pytest.fixture()
def preset_chains() -> Dict[int, ChainSpec]:
    """the evaluation preset: 5 repeaters at q = 3%, with 0, 2 and 4
    honest repeaters (balanced split)"""
    return {h: create_uniform_chain(5, PRESET_Q, h) for h in (0, 2, 4)}
