"""Deterministic seeding.

Every random draw in the package comes from numpy's PCG64 generator
(``np.random.default_rng``).  Sub-streams (per trial chunk, per graph in an
experiment) get their seed from :func:`derive_seed`, a SplitMix64 finaliser
applied to ``master + golden * (index + 1)``.  Because seeds depend only on
``(master, index)``, results do not depend on how work is scheduled.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

T = TypeVar("T")


def splitmix64(x: int) -> int:
    x &= MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(master: int, index: int) -> int:
    """Seed of sub-stream ``index`` of ``master`` (both taken mod 2**64)."""
    return splitmix64((master & MASK64) + _GOLDEN * ((index + 1) & MASK64))


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed & MASK64)


def thread_count() -> int:
    raw = os.environ.get("PTLAB_THREADS")
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


CHUNK = 8192


def chunked_trials(
    seed: int,
    trials: int,
    work: Callable[[np.random.Generator, int], T],
    chunk: int = CHUNK,
) -> list[T]:
    """Run ``work(rng, size)`` over fixed-size chunks of ``trials``.

    Chunk ``i`` always uses ``derive_seed(seed, i)``, and results come back in
    chunk order, so the output is the same for any PTLAB_THREADS value.
    """
    sizes = [chunk] * (trials // chunk)
    if trials % chunk:
        sizes.append(trials % chunk)
    jobs: Sequence[tuple[int, int]] = list(enumerate(sizes))

    def run(job: tuple[int, int]) -> T:
        i, size = job
        return work(rng_for(derive_seed(seed, i)), size)

    threads = thread_count()
    if threads == 1 or len(jobs) <= 1:
        return [run(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, jobs))
