"""Vectorised one-dimensional scan kernels over many independent trials at once.

All trials of a block are pooled into one sorted array: a point x of trial i is
stored under the key ``i * stride + x`` with ``stride`` larger than the trial's
span plus the window width, so windows never reach into a neighbouring trial.
"""

import logging
from typing import Iterator, Tuple

import numpy as np

from app.core.config import settings

logger = logging.getLogger(__name__)


class PooledTrials:
    """Poisson points of ``trials`` independent copies of [0, span] at a given rate."""

    def __init__(self, rng: np.random.Generator, rate: float, span: float, trials: int):
        self.span = span
        self.trials = trials
        self.stride = float(np.ceil(2 * span + 1))
        counts = rng.poisson(rate * span, size=trials)
        ids = np.repeat(np.arange(trials), counts)
        coords = rng.random(ids.size) * span
        order = np.argsort(ids * self.stride + coords, kind="stable")
        self.ids = ids[order]
        self.coords = coords[order]
        self.keys = self.ids * self.stride + self.coords

    def count_between(self, trial_ids: np.ndarray, lo, hi) -> np.ndarray:
        """Points of each listed trial in the closed range [lo, hi]."""
        base = trial_ids * self.stride
        left = np.searchsorted(self.keys, base + lo, side="left")
        right = np.searchsorted(self.keys, base + hi, side="right")
        return right - left

    def window_max(self, lo: float, hi: float, width: float) -> np.ndarray:
        """Per trial, the largest count of a closed window of length ``width`` inside [lo, hi].

        Sliding a window right never loses points until its left end passes one, so
        the maximum is attained with the left end on a point or at hi - width.
        """
        best = self.count_between(np.arange(self.trials), hi - width, hi)
        starts = np.nonzero((self.coords >= lo) & (self.coords <= hi - width))[0]
        if starts.size:
            ends = np.searchsorted(self.keys, self.keys[starts] + width, side="right")
            np.maximum.at(best, self.ids[starts], ends - starts)
        return best


def block_generators(master_seed: int, trials: int, block_size: int = None) -> Iterator[Tuple[np.random.Generator, int]]:
    """(generator, size) per block; block b always draws from spawn key (b,)."""
    block_size = block_size or settings.mc_block_size
    for block, start in enumerate(range(0, trials, block_size)):
        seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(block,))
        yield np.random.default_rng(seq), min(block_size, trials - start)


def adjacent_cell_indicators(rng: np.random.Generator, t: float, r: float, k: int, trials: int) -> np.ndarray:
    """X_n^(k) for n = 1..N, N = floor(1/r), on `trials` Poisson(t) samples of [0, 1].

    Cells are I_n = [n r, (n+1) r) clipped to [0, 1]; X_n is 1 when I_n ∪ I_{n+1}
    holds a window of length r with at least k points. The union for n = N is
    [N r, 1), shorter than r, and is scanned with windows clipped at 1.
    Returns an array of shape (trials, N).
    """
    pool = PooledTrials(rng, t, 1.0, trials)
    N = int(np.floor(1.0 / r))
    cells = np.arange(1, N + 1)
    union_end = np.minimum((cells + 2) * r, 1.0)
    union_start = cells * r
    # boundary window: the right-most window inside each union
    edge_lo = np.maximum(union_start, union_end - r)
    trial_ids = np.repeat(np.arange(trials), N)
    best = pool.count_between(trial_ids, np.tile(edge_lo, trials), np.tile(union_end, trials)).reshape(trials, N)

    cell_of = np.floor(pool.coords / r).astype(np.int64)
    starts = np.nonzero((cell_of >= 1) & (cell_of <= N))[0]
    if starts.size:
        n_idx = cell_of[starts] - 1
        stop = np.minimum(pool.coords[starts] + r, union_end[n_idx])
        ends = np.searchsorted(pool.keys, pool.ids[starts] * pool.stride + stop, side="right")
        flat = best.reshape(-1)
        np.maximum.at(flat, pool.ids[starts] * N + n_idx, ends - starts)
    return best >= k
