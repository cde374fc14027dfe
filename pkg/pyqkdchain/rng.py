"""Seeded generators and the trial-splitting contract shared by every
stochastic routine: identical (seed, trials, workers) give identical
results, whatever the completion order of the workers.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, TypeVar

import numpy as np

log = logging.getLogger(__name__)

T = TypeVar("T")
DEFAULT_SEED = 20240101


def default_seed() -> int:
    """seed to use when none is given, from env QKDCHAIN_SEED if set"""
    return int(os.getenv("QKDCHAIN_SEED", DEFAULT_SEED))


def make_generator(seed: Optional[int] = None) -> np.random.Generator:
    return np.random.default_rng(default_seed() if seed is None else seed)


def spawn_generators(
    seed: Optional[int], workers: int
) -> List[np.random.Generator]:
    """independent child generators derived from a single seed"""
    if workers < 1:
        raise ValueError(f"need at least one worker {workers=}")
    root = np.random.SeedSequence(default_seed() if seed is None else seed)
    return [np.random.default_rng(child) for child in root.spawn(workers)]


def split_trials(trials: int, workers: int) -> List[int]:
    """near-even split of trials, the first workers taking the rest"""
    base, extra = divmod(trials, workers)
    return [base + (1 if w < extra else 0) for w in range(workers)]


def run_split(
    task: Callable[[np.random.Generator, int], T],
    trials: int,
    seed: Optional[int],
    workers: int = 1,
) -> List[T]:
    """Runs task(generator, n_trials) once per worker on its share of the
    trials and returns the partial results in worker order.

    :param task: callable working through n_trials with the generator
    :param trials: total number of trials
    :param seed: root seed the worker generators are spawned from
    :param workers: number of workers (threads)
    :return: one partial result per worker
    """
    if trials < 1:
        raise ValueError(f"need at least one trial {trials=}")
    gens = spawn_generators(seed, workers)
    shares = split_trials(trials, workers)
    log.debug(f"running {trials=} over {workers=} as {shares=}")
    if workers == 1:
        return [task(gens[0], shares[0])]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, gens, shares))
