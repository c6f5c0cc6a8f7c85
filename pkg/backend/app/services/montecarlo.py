"""Experiment harness: repeated realisations and direct simulation oracles.

Every random quantity is derived from a master seed through SeedSequence spawn
keys: experiment trials use (per-t seed, trial_index), the vectorised scan
simulators use one key per block of trials. Neither depends on the worker count.
"""

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from app.core.config import settings
from app.core.exceptions import ParameterValidationError, TrialFailedError
from app.models.analytics import RegimeKind
from app.models.complexes import ComplexKind
from app.models.experiment import (EmpiricalSummary, ExperimentConfig, GumbelPoint, LdpEstimate, MomentEstimate,
                                   ParticipationSummary, PqEstimate, StandardizedDimension, TrialRecord,
                                   TwoPointEstimate, XkSimulation)
from app.models.pointprocess import Window
from app.services import complexes
from app.services.analytics import gumbel_cdf, gumbel_constants, ldp_scaling, markov_bounds
from app.services.pointprocess import count_in_ball, derive_seed, sample_poisson
from app.services.poisson import poisson_logpmf, poisson_sf
from app.services.scan import PooledTrials, adjacent_cell_indicators, block_generators

logger = logging.getLogger(__name__)

# pooled points per vectorised block
_POINTS_PER_BLOCK = 4_000_000


def run_trial(window: Window, kind: ComplexKind, t: float, r: float, seed: int, trial_index: int,
              n_max: Optional[int] = None, participation_n: Optional[int] = None) -> TrialRecord:
    start = time.perf_counter_ns()
    try:
        config = sample_poisson(window, t, seed, trial_index)
        dim = complexes.dimension(config, r, kind)
        fv = complexes.f_vector(config, r, kind, n_max) if n_max is not None else None
        part = complexes.face_participation(config, r, kind, participation_n) if participation_n is not None else None
        fixed = count_in_ball(config, np.full(window.dim, 0.5), r / 2)
    except Exception as exc:
        raise TrialFailedError(t, trial_index, exc) from exc
    return TrialRecord(t=t, trial_index=trial_index, dimension=dim, runtime_ns=time.perf_counter_ns() - start,
                       point_count=config.n, fixed_ball_count=fixed, f_vector=fv, participation=part)


def _run_trial_chunk(task) -> List[TrialRecord]:
    window, kind, t, r, seed, indices, n_max, participation_n = task
    return [run_trial(window, kind, t, r, seed, i, n_max, participation_n) for i in indices]


class ExperimentService:
    """Runs trials of one intensity, optionally across worker processes.

    Chunks are contiguous index ranges and results are reassembled in index order,
    so the output is identical for every worker count.
    """

    def __init__(self, workers: Optional[int] = None):
        self.workers = max(1, workers or settings.workers)

    def _chunks(self, trials: int) -> List[range]:
        pieces = max(1, min(trials, 4 * self.workers))
        bounds = np.linspace(0, trials, pieces + 1).astype(int)
        return [range(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]

    def run_trials(self, window: Window, kind: ComplexKind, t: float, r: float, seed: int, trials: int,
                   n_max: Optional[int] = None, participation_n: Optional[int] = None) -> List[TrialRecord]:
        tasks = [(window, kind, t, r, seed, chunk, n_max, participation_n) for chunk in self._chunks(trials)]
        if self.workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=self.workers) as executor:
                results = list(executor.map(_run_trial_chunk, tasks))
        else:
            results = [_run_trial_chunk(task) for task in tasks]
        return [record for chunk in results for record in chunk]

    def collect(self, config: ExperimentConfig, n_max: Optional[int] = None,
                participation_n: Optional[int] = None) -> List[Tuple[float, int, List[TrialRecord]]]:
        """(t, per-t seed, trial records) for every t of the config."""
        out = []
        for t_index, t in enumerate(config.t_values):
            seed = derive_seed(config.master_seed, t_index)
            started = time.perf_counter()
            records = self.run_trials(config.window, config.complex, t, config.radius(t), seed, config.trials,
                                      n_max=n_max, participation_n=participation_n)
            mean_ms = np.mean([rec.runtime_ns for rec in records]) / 1e6
            logger.info(f"t={t:g}: {config.trials} trials in {time.perf_counter() - started:.2f}s "
                        f"({mean_ms:.3f} ms per trial)")
            out.append((t, seed, records))
        return out


def _moment(values: np.ndarray, m: int) -> MomentEstimate:
    powered = values.astype(float) ** m
    stderr = powered.std(ddof=1) / math.sqrt(values.size) if values.size > 1 else 0.0
    return MomentEstimate(m=m, value=float(powered.mean()), stderr=float(stderr))


def summarize_trials(config: ExperimentConfig, t: float, seed: int, records: Sequence[TrialRecord]) -> EmpiricalSummary:
    dims = np.array([rec.dimension for rec in records])
    values, freq = np.unique(dims, return_counts=True)
    counts = {int(v): int(c) for v, c in zip(values, freq)}
    two_point_mass = None
    if config.target_k is not None:
        k = config.target_k
        two_point_mass = (counts.get(k - 1, 0) + counts.get(k, 0)) / len(records)
    return EmpiricalSummary(t=t, rho=config.rho(t), r_t=config.radius(t), trials=len(records), seed=seed,
                            counts=counts, moments=[_moment(dims, m) for m in config.moments],
                            two_point_k=config.target_k, two_point_mass=two_point_mass,
                            max_dimension=int(dims.max()),
                            max_fixed_ball_count=max(rec.fixed_ball_count for rec in records))


def run_dimension_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> List[EmpiricalSummary]:
    service = ExperimentService(workers)
    logger.info(f"dimension experiment: d={config.window.dim}, kind={config.complex.value}, "
                f"t={config.t_values}, trials={config.trials}, seed={config.master_seed}")
    return [summarize_trials(config, t, seed, records)
            for t, seed, records in service.collect(config, config.n_max, config.participation_n)]


def _binomial_stderr(p: float, n: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / n)


def estimate_two_point(config: ExperimentConfig, k_rule: Optional[Callable[[float], int]] = None,
                       workers: Optional[int] = None) -> List[TwoPointEstimate]:
    """P(D in {k-1, k}) per t; without a rule, k is the upper value of the heaviest consecutive pair."""
    if config.trials < 1:
        raise ParameterValidationError("two-point estimation needs at least one trial")
    out = []
    for summary in run_dimension_experiment(config, workers):
        if k_rule is not None:
            k = int(k_rule(summary.t))
        else:
            counts = summary.counts
            k = max(range(min(counts), max(counts) + 2),
                    key=lambda v: (counts.get(v - 1, 0) + counts.get(v, 0), -v))
        mass = (summary.counts.get(k - 1, 0) + summary.counts.get(k, 0)) / summary.trials
        stderr = _binomial_stderr(mass, summary.trials)
        out.append(TwoPointEstimate(t=summary.t, k=k, mass=mass, stderr=stderr, radius=3 * stderr,
                                    trials=summary.trials))
    return out


def estimate_ldp_rate(config: ExperimentConfig, a: float, regime: Optional[RegimeKind] = None,
                      workers: Optional[int] = None) -> List[LdpEstimate]:
    """-log P(D >= a n_t) / m_t per t, floored at -log(1/trials)/m_t when no trial reaches the level."""
    regime = regime or config.regime
    if regime is None:
        raise ParameterValidationError("LDP estimation needs a regime (config.regime or the regime argument)")
    out = []
    for summary in run_dimension_experiment(config, workers):
        n_t, m_t = ldp_scaling(regime, summary.t, summary.rho, config.window.dim)
        threshold = a * n_t
        hits = sum(count for dim, count in summary.counts.items() if dim >= threshold)
        prob = hits / summary.trials
        if hits == 0:
            logger.warning(f"t={summary.t:g}: no trial reached D >= {threshold:.4g}; reporting the floor")
            estimate = math.log(summary.trials) / m_t
            out.append(LdpEstimate(t=summary.t, a=a, n_t=n_t, m_t=m_t, threshold=threshold, probability=0.0,
                                   estimate=estimate, stderr=math.inf, floored=True))
            continue
        stderr = _binomial_stderr(prob, summary.trials) / (prob * m_t)
        out.append(LdpEstimate(t=summary.t, a=a, n_t=n_t, m_t=m_t, threshold=threshold, probability=prob,
                               estimate=max(0.0, -math.log(prob) / m_t), stderr=stderr))
    return out


def participation_statistics(config: ExperimentConfig, n: int, workers: Optional[int] = None) -> List[ParticipationSummary]:
    if n < 1:
        raise ParameterValidationError(f"participation statistics need n >= 1, got {n}")
    service = ExperimentService(workers)
    out = []
    for t, _, records in service.collect(config, participation_n=n):
        N = np.array([rec.participation[0] for rec in records], dtype=float)
        M = np.array([rec.participation[1] for rec in records], dtype=float)
        dims = np.array([rec.dimension for rec in records])
        trials = len(records)
        p_below = float(np.mean(dims < n))
        var_N = float(N.var(ddof=1)) if trials > 1 else 0.0
        bounds = markov_bounds(float(N.mean()), var_N, float(M.mean()), n)
        out.append(ParticipationSummary(t=t, n=n, trials=trials, mean_N=float(N.mean()), var_N=var_N,
                                        mean_M=float(M.mean()), p_below=p_below, p_at_least=1.0 - p_below,
                                        stderr_below=_binomial_stderr(p_below, trials),
                                        stderr_at_least=_binomial_stderr(p_below, trials),
                                        markov_lower_tail=bounds.lower_tail, markov_upper_tail=bounds.upper_tail,
                                        markov_upper_printed=bounds.markov_upper_printed))
    return out


# ---------------------------------------------------------------------------
# Vectorised one-dimensional scan simulations
# ---------------------------------------------------------------------------

def _block_size(points_per_trial: float) -> int:
    return max(1, min(settings.mc_block_size, int(_POINTS_PER_BLOCK // max(points_per_trial, 1.0))))


def total_variation_to_poisson(samples, lam: float) -> Tuple[float, float]:
    """Exact TV between the empirical law of `samples` and Poisson(lam), with its estimation error.

    The Poisson mass beyond the largest observed value is included.
    """
    values = np.asarray(samples, dtype=np.int64)
    if values.size == 0 or values.min() < 0:
        raise ParameterValidationError("samples must be a nonempty array of nonnegative integers")
    n = values.size
    p_hat = np.bincount(values) / n
    support = np.arange(p_hat.size)
    if lam <= 0:
        target = (support == 0).astype(float)
        tail = 0.0
    else:
        target = np.exp([poisson_logpmf(lam, int(k)) for k in support])
        tail = poisson_sf(lam, int(p_hat.size))
    tv = 0.5 * (float(np.abs(p_hat - target).sum()) + tail)
    error = 0.5 * float(np.sqrt(p_hat * (1 - p_hat) / n).sum())
    return tv, error


def mc_pq(rho: float, k: int, trials: int, master_seed: int) -> PqEstimate:
    """Direct simulation of p^(k) on [0, 2] and q^(k) on [0, 3] at intensity rho."""
    if not rho > 0 or k < 0 or trials < 1:
        raise ParameterValidationError(f"mc_pq needs rho > 0, k >= 0, trials >= 1 (rho={rho}, k={k}, trials={trials})")
    p_hits = q_hits = 0
    for rng, size in block_generators(master_seed, trials, _block_size(3 * rho)):
        pool = PooledTrials(rng, rho, 3.0, size)
        first = pool.window_max(0.0, 2.0, 1.0) >= k
        second = pool.window_max(1.0, 3.0, 1.0) >= k
        p_hits += int(first.sum())
        q_hits += int((first & second).sum())
    p_hat, q_hat = p_hits / trials, q_hits / trials
    return PqEstimate(rho=rho, k=k, trials=trials, p_hat=p_hat, q_hat=q_hat,
                      p_stderr=_binomial_stderr(p_hat, trials), q_stderr=_binomial_stderr(q_hat, trials))


def simulate_scaled_scan(s: float, trials: int, master_seed: int) -> np.ndarray:
    """Samples of (M - s)/sqrt(s), M the largest unit-window count on [0, 2] at intensity s."""
    if not s > 0 or trials < 1:
        raise ParameterValidationError(f"scaled scan needs s > 0 and trials >= 1 (s={s}, trials={trials})")
    out = []
    for rng, size in block_generators(master_seed, trials, _block_size(2 * s)):
        maxima = PooledTrials(rng, s, 2.0, size).window_max(0.0, 2.0, 1.0)
        out.append((maxima - s) / math.sqrt(s))
    return np.concatenate(out)


def empirical_cdf(samples: np.ndarray, x: float) -> float:
    return float(np.mean(np.asarray(samples) <= x))


def simulate_X_k(t: float, rho: float, k: int, trials: int, master_seed: int) -> XkSimulation:
    """Law of X^(k) = sum_{n=1}^N X_n^(k) on [0, 1], r_t = rho/t, N = floor(1/r_t)."""
    if not t > 0 or not rho > 0:
        raise ParameterValidationError(f"t and rho must be positive (t={t}, rho={rho})")
    r = rho / t
    if not r < 0.5:
        raise ParameterValidationError(f"X^(k) needs r_t = rho/t < 1/2, got {r}")
    if k < 1 or trials < 1:
        raise ParameterValidationError(f"X^(k) needs k >= 1 and trials >= 1 (k={k}, trials={trials})")
    N = int(math.floor(1.0 / r))
    chunks = []
    for rng, size in block_generators(master_seed, trials, _block_size(t)):
        chunks.append(adjacent_cell_indicators(rng, t, r, k, size).sum(axis=1))
    samples = np.concatenate(chunks)
    mean = float(samples.mean())
    stderr = float(samples.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    tv, tv_error = total_variation_to_poisson(samples, mean)
    logger.debug(f"X^({k}) at t={t:g}, rho={rho:g}: mean={mean:.4f}, TV={tv:.4f}")
    return XkSimulation(t=t, rho=rho, k=k, N=N, trials=trials, samples=samples.tolist(), mean=mean,
                        stderr=stderr, tv=tv, tv_error=tv_error)


def simulate_dimension_1d(t: float, rho: float, trials: int, master_seed: int) -> np.ndarray:
    """Samples of D on [0, 1] at intensity t and r_t = rho / t.

    On the line VR and Cech agree and D + 1 is the largest count of a closed window
    of length r_t.
    """
    if not t > rho > 0 or trials < 1:
        raise ParameterValidationError(f"need t > rho > 0 and trials >= 1 (t={t}, rho={rho}, trials={trials})")
    r = rho / t
    chunks = []
    for rng, size in block_generators(master_seed, trials, _block_size(t)):
        chunks.append(PooledTrials(rng, t, 1.0, size).window_max(0.0, 1.0, r) - 1)
    return np.maximum(np.concatenate(chunks), 0)


def simulate_standardized_dimension(t: float, rho: float, xs: Sequence[float], trials: int,
                                    master_seed: int) -> StandardizedDimension:
    """Empirical CDF of (D - a_t) / b_t at each x next to the Gumbel limit exp(-e^(-x))."""
    constants = gumbel_constants(t, rho)
    scaled = (simulate_dimension_1d(t, rho, trials, master_seed) - constants.a) / constants.b
    points = []
    for x in xs:
        value = empirical_cdf(scaled, x)
        points.append(GumbelPoint(x=x, empirical=value, stderr=_binomial_stderr(value, trials), limit=gumbel_cdf(x)))
    logger.debug(f"standardized D at t={t:g}, rho={rho:g}: mean={scaled.mean():.4f} over {trials} trials")
    return StandardizedDimension(t=t, rho=rho, a=constants.a, b=constants.b, trials=trials, seed=master_seed,
                                 mean=float(scaled.mean()), points=points)
