"""Seedable, splittable random streams.

Every run owns one numpy Generator built from a 64-bit seed. Batches derive
an independent seed per run from (master seed, run index) through
SeedSequence spawn keys, so a run can be replayed alone from the seed
recorded in its transcript.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

from .qot_exceptions import ConfigError

SEED_BOUND = 2**64

T = TypeVar("T")


def check_seed(seed: int) -> int:
    if not 0 <= seed < SEED_BOUND:
        raise ConfigError("seed", seed, "must be a 64-bit unsigned integer")
    return int(seed)


def stream(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(check_seed(seed)))


def derive_seed(master: int, *path: int) -> int:
    """Seed of the stream at `path` below `master`; stable across processes."""
    sequence = np.random.SeedSequence(check_seed(master), spawn_key=tuple(int(p) for p in path))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def draw_index(probabilities, u: float) -> int:
    """Cumulative-probability inversion in index order.

    Zero-probability entries are never returned, even when rounding leaves
    u at or past the final cumulative value.
    """
    cumulative = 0.0
    last = None
    for index, probability in enumerate(probabilities):
        if probability <= 0.0:
            continue
        last = index
        cumulative += probability
        if u < cumulative:
            return index
    if last is None:
        raise ValueError("no branch with positive probability")
    return last


def chunk_bounds(trials: int, chunks: int) -> list[tuple[int, int]]:
    chunks = max(1, min(chunks, trials))
    edges = [trials * k // chunks for k in range(chunks + 1)]
    return [(edges[k], edges[k + 1]) for k in range(chunks)]


def map_runs(worker: Callable[[int, int], T], trials: int, workers: int = 1) -> list[T]:
    """Apply worker to contiguous run-index ranges, in a thread pool when workers > 1.

    Results come back in range order; callers combine them with
    order-independent reductions (sums of counts).
    """
    bounds = chunk_bounds(trials, workers)
    if len(bounds) == 1:
        return [worker(*bounds[0])]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(worker, start, stop) for start, stop in bounds]
        return [future.result() for future in futures]
