"""Homogeneous Poisson point processes on the unit-volume window.

Every realisation is a pure function of ``(window, t, seed, trial_index)``: the
trial generator is built from ``SeedSequence(entropy=seed, spawn_key=(trial_index,))``,
which hashes both values into an independent stream, so trials can be produced in
any order or on any worker and still match bit for bit.
"""

import logging
import math

import numpy as np

from app.core.config import settings
from app.core.exceptions import ParameterValidationError
from app.models.pointprocess import PointConfiguration, PointMeta, Window

logger = logging.getLogger(__name__)

U64 = 2**64


def trial_generator(seed: int, trial_index: int) -> np.random.Generator:
    if not 0 <= seed < U64 or trial_index < 0:
        raise ParameterValidationError(f"seed must be a u64 and trial_index >= 0 (got {seed}, {trial_index})")
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(trial_index,)))


def derive_seed(master_seed: int, *key: int) -> int:
    """First 64-bit word of the substream ``(master_seed, key)``."""
    state = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(key)).generate_state(1, dtype=np.uint64)
    return int(state[0])


def poisson_count(rng: np.random.Generator, lam: float) -> int:
    """Exact Poisson(lam) draw.

    Sequential cdf inversion for lam <= settings.poisson_inversion_max; above it numpy's
    PTRS transformed-rejection sampler, which is exact in distribution.
    """
    if lam <= settings.poisson_inversion_max:
        u = rng.random()
        k = 0
        p = math.exp(-lam)
        cdf = p
        while u > cdf and p > 0.0:
            k += 1
            p *= lam / k
            cdf += p
        return k
    return int(rng.poisson(lam))


def _check_intensity(t: float) -> None:
    if not isinstance(t, (int, float)) or not math.isfinite(t) or t <= 0:
        raise ParameterValidationError(f"intensity t must be a positive finite number, got {t!r}")


def sample_poisson(window: Window, t: float, seed: int, trial_index: int = 0) -> PointConfiguration:
    _check_intensity(t)
    rng = trial_generator(seed, trial_index)
    count = poisson_count(rng, t * window.volume)
    points = rng.random((count, window.dim))
    logger.debug(f"sampled {count} points (d={window.dim}, t={t}, seed={seed}, trial={trial_index})")
    return PointConfiguration(dim=window.dim, points=points,
                              meta=PointMeta(intensity=float(t), seed=seed, trial_index=trial_index))


def count_in_box(config: PointConfiguration, lower, upper) -> int:
    """Number of points in the half-open box [lower, upper)."""
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    inside = np.all((config.points >= lo) & (config.points < hi), axis=1)
    return int(np.count_nonzero(inside))


def count_in_ball(config: PointConfiguration, center, radius: float) -> int:
    if config.n == 0:
        return 0
    dist = np.linalg.norm(config.points - np.asarray(center, dtype=float), axis=1)
    return int(np.count_nonzero(dist <= radius + settings.geometric_tolerance))
