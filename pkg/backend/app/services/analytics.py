"""Closed-form quantities: regime predictors, rate functions, Gumbel constants,
exact scan probabilities, Chen-Stein and tail bounds.
"""

import logging
import math
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln, logsumexp, pdtr
from scipy.stats import norm

from app.core.config import settings
from app.core.exceptions import NumericalError, ParameterValidationError
from app.models.analytics import (GumbelConstants, MarkovBounds, PredictionRecord, QBoundTerms, RegimeKind,
                                  RegimeSpec, ScanPair, TwoPointLaw)
from app.models.complexes import ComplexKind
from app.services.geometry import meb_radius
from app.services.poisson import (chernoff_upper_log, poisson_cdf, poisson_log_cdf, poisson_logpmf, poisson_pmf,
                                  poisson_sf)

logger = logging.getLogger(__name__)

PROBABILITY_SLACK = 1e-12


def _require_positive(name: str, value: float) -> None:
    if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
        raise ParameterValidationError(f"{name} must be a positive finite number, got {value!r}")


# ---------------------------------------------------------------------------
# Geometry constants and f-vector expectations
# ---------------------------------------------------------------------------

def unit_ball_volume(d: int) -> float:
    """kappa_d = pi^(d/2) / Gamma(d/2 + 1)."""
    if d < 1:
        raise ParameterValidationError(f"d must be >= 1, got {d}")
    return math.exp(0.5 * d * math.log(math.pi) - float(gammaln(0.5 * d + 1)))


def scan_mean_factor(d: int) -> float:
    """kappa_d / 2^d: mean count of a ball of radius r/2 per unit rho."""
    return unit_ball_volume(d) / 2 ** d


def solve_beta(c: float) -> float:
    """Unique beta >= 1 with beta ln beta - beta + 1 = c."""
    if not math.isfinite(c) or c < 0:
        raise ParameterValidationError(f"c must be finite and >= 0, got {c!r}")
    if c == 0:
        return 1.0

    def residual(beta: float) -> float:
        return beta * math.log(beta) - beta + 1.0 - c

    hi = 2.0
    while residual(hi) < 0:
        hi *= 2.0
    return brentq(residual, 1.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def expected_f_n(t: float, rho: float, n: int, mu_n: float) -> float:
    """E f_n ~ mu_n / (n+1)! * t * rho^n; E f_0 = t."""
    _require_positive("t", t)
    _require_positive("rho", rho)
    if n < 0:
        raise ParameterValidationError(f"n must be >= 0, got {n}")
    if n == 0:
        return float(t)
    _require_positive("mu_n", mu_n)
    return math.exp(math.log(mu_n) - float(gammaln(n + 2)) + math.log(t) + n * math.log(rho))


def _face_indicator(samples: np.ndarray, kind: ComplexKind) -> np.ndarray:
    """Whether the origin together with each row's points forms a face at distance 1."""
    count, n, d = samples.shape
    with_origin = np.concatenate([np.zeros((count, 1, d)), samples], axis=1)
    diff = with_origin[:, :, None, :] - with_origin[:, None, :, :]
    inside = np.all(np.einsum("sijk,sijk->sij", diff, diff) <= 1.0 + settings.geometric_tolerance, axis=(1, 2))
    if kind == ComplexKind.vietoris_rips or n < 2 or d == 1:
        return inside
    limit = 0.5 + settings.geometric_tolerance
    for idx in np.nonzero(inside)[0]:
        inside[idx] = meb_radius(with_origin[idx]) <= limit
    return inside


def mu_n_estimate(d: int, n: int, kind: ComplexKind = ComplexKind.vietoris_rips, samples: Optional[int] = None,
                  seed: int = 0) -> Tuple[float, float]:
    """Monte Carlo value of the integral over (B^d)^n of the face indicator of {0, x_1, ..., x_n}.

    Returns (estimate, standard error), both scaled by kappa_d^n.
    """
    if d < 1:
        raise ParameterValidationError(f"d must be >= 1, got {d}")
    if n < 1:
        raise ParameterValidationError("mu_0 = 1 by definition; estimation needs n >= 1")
    samples = samples or settings.mu_samples
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(d, n)))
    if d == 1:
        points = rng.uniform(-1.0, 1.0, size=(samples, n, 1))
    else:
        direction = rng.standard_normal((samples, n, d))
        direction /= np.linalg.norm(direction, axis=2, keepdims=True)
        points = direction * rng.random((samples, n, 1)) ** (1.0 / d)
    hits = _face_indicator(points, kind).astype(float)
    scale = unit_ball_volume(d) ** n
    stderr = scale * hits.std(ddof=1) / math.sqrt(samples) if samples > 1 else math.inf
    return scale * hits.mean(), stderr


def mu_n_value(d: int, n: int, kind: ComplexKind = ComplexKind.vietoris_rips,
               mu_table: Optional[Dict[int, float]] = None) -> float:
    if n == 0:
        return 1.0
    if mu_table and n in mu_table:
        return mu_table[n]
    if d == 1:
        # {0, x_1..x_n} fits in a unit interval: n+1 choices of the leftmost point
        return float(n + 1)
    logger.warning(f"no tabulated mu_{n} for d={d}, kind={kind.value}; falling back to estimation")
    return mu_n_estimate(d, n, kind)[0]


# ---------------------------------------------------------------------------
# Regime predictors
# ---------------------------------------------------------------------------

def two_point_law(k: int, lam: float, moments: Sequence[int] = (1, 2)) -> TwoPointLaw:
    if k < 1 or lam < 0:
        raise ParameterValidationError(f"two-point law needs k >= 1 and lam >= 0 (k={k}, lam={lam})")
    p_lower = math.exp(-lam)
    p_upper = 1.0 - p_lower
    values = {m: p_lower * (k - 1) ** m + p_upper * k ** m for m in moments}
    return TwoPointLaw(k=k, lam=lam, p_lower=p_lower, p_upper=p_upper, moments=values)


def intermediate_k(t: float, rho: float) -> float:
    """k_t = ln t / ln(ln t / rho)."""
    _require_positive("t", t)
    _require_positive("rho", rho)
    ratio = math.log(t) / rho
    if ratio <= 1:
        raise ParameterValidationError(f"ln t / rho must exceed 1, got {ratio}")
    return math.log(t) / math.log(ratio)


def predict_dimension(spec: RegimeSpec, mu_table: Optional[Dict[int, float]] = None,
                      kind: ComplexKind = ComplexKind.vietoris_rips, max_order: int = 64) -> PredictionRecord:
    if spec.regime == RegimeKind.power_sparse:
        expected = []
        for n in range(max_order + 1):
            value = expected_f_n(spec.t, spec.rho, n, mu_n_value(spec.d, n, kind, mu_table))
            expected.append(value)
            if n >= 1 and value < settings.regime_i_threshold:
                law = two_point_law(n, value, moments=(1, 2))
                return PredictionRecord(spec=spec, prediction=law.moments[1], k=n, lam=value, two_point=law,
                                        expected_f=expected,
                                        note=f"first n with E f_n < {settings.regime_i_threshold}")
        raise ParameterValidationError(f"E f_n stays above the threshold up to n={max_order}; not a sparse setting")
    if spec.regime == RegimeKind.intermediate:
        return PredictionRecord(spec=spec, prediction=intermediate_k(spec.t, spec.rho))
    if spec.regime == RegimeKind.critical:
        beta = solve_beta(2 ** spec.d / (spec.B * unit_ball_volume(spec.d)))
        return PredictionRecord(spec=spec, prediction=scan_mean_factor(spec.d) * beta * spec.rho, beta=beta)
    return PredictionRecord(spec=spec, prediction=scan_mean_factor(spec.d) * spec.rho)


# ---------------------------------------------------------------------------
# Large deviations
# ---------------------------------------------------------------------------

def ldp_scaling(regime: RegimeKind, t: float, rho: float, d: int) -> Tuple[float, float]:
    """(n_t, m_t): location and speed scalings."""
    _require_positive("t", t)
    _require_positive("rho", rho)
    if regime in (RegimeKind.power_sparse, RegimeKind.intermediate):
        if t <= rho:
            raise ParameterValidationError(f"sub-logarithmic scaling needs t > rho (t={t}, rho={rho})")
        return math.log(t) / math.log(t / rho), math.log(t)
    scale = scan_mean_factor(d) * rho
    return scale, scale


def ldp_rate(regime: RegimeKind, x: float, B: Optional[float] = None) -> float:
    """Rate function I(x); +inf outside its effective domain.

    For the critical regime ``B`` is the effective constant appearing as 1/B in the rate,
    i.e. B * kappa_d / 2^d in terms of lim rho_t / ln t.
    """
    if not math.isfinite(x):
        raise ParameterValidationError(f"x must be finite, got {x!r}")
    if regime in (RegimeKind.power_sparse, RegimeKind.intermediate):
        return x - 1.0 if x >= 1.0 else math.inf
    if regime == RegimeKind.critical:
        if B is None or not B > 0:
            raise ParameterValidationError("critical rate function requires B > 0")
        beta = solve_beta(1.0 / B)
        if x < beta:
            return math.inf
        return max(0.0, 1.0 + x * math.log(x) - x - 1.0 / B)
    return 1.0 + x * math.log(x) - x if x >= 1.0 else math.inf


def effective_rate_constant(B: float, d: int) -> float:
    return B * scan_mean_factor(d)


# ---------------------------------------------------------------------------
# Gumbel regime
# ---------------------------------------------------------------------------

def _log_ratio(t: float, rho: float) -> float:
    _require_positive("t", t)
    _require_positive("rho", rho)
    if t <= rho:
        raise ParameterValidationError(f"Gumbel constants need t > rho (t={t}, rho={rho})")
    return math.log(t / rho)


def gumbel_constants(t: float, rho: float) -> GumbelConstants:
    L = _log_ratio(t, rho)
    correction = 1.0 + math.log(L) / (4 * L) - math.log(math.sqrt(math.pi)) / (2 * L)
    a = rho * (1.0 + math.sqrt(2 * L / rho) * correction)
    return GumbelConstants(a=a, b=math.sqrt(rho / (2 * L)))


def k_t(t: float, rho: float, x: float) -> float:
    constants = gumbel_constants(t, rho)
    return constants.a + x * constants.b


def epsilon_t(t: float, rho: float, x: float) -> float:
    return (k_t(t, rho, x) - rho) / rho


def gumbel_cdf(x: float) -> float:
    """Standard Gumbel law exp(-e^(-x)), the limit of (D - a_t) / b_t in one dimension."""
    if math.isnan(x):
        raise ParameterValidationError("x must not be NaN")
    if x < -700:
        return 0.0
    return math.exp(-math.exp(-x))


def gumbel_expected_count(t: float, rho: float, x: float) -> float:
    """N p^(k) at k = k_t(x), N = floor(t / rho), log-interpolated between the integers around k.

    This is the mean of X^(k) up to the two clipped cells at the right end, and tends
    to e^(-x) once rho eps_t^3 is small.
    """
    k = k_t(t, rho, x)
    N = math.floor(t / rho)
    lo = math.floor(k)
    weight = k - lo
    p_lo = pk_exact(rho, lo)
    if weight == 0:
        return N * p_lo
    p_hi = pk_exact(rho, lo + 1)
    if p_lo == 0 or p_hi == 0:
        return N * ((1 - weight) * p_lo + weight * p_hi)
    return N * math.exp((1 - weight) * math.log(p_lo) + weight * math.log(p_hi))


# ---------------------------------------------------------------------------
# Exact scan probabilities on [0, 2] and [0, 3]
# ---------------------------------------------------------------------------

def _check_probability(name: str, value: float) -> float:
    if value < -PROBABILITY_SLACK or value > 1 + PROBABILITY_SLACK or math.isnan(value):
        raise NumericalError(f"{name} = {value!r} lies outside [0, 1]")
    clamped = min(1.0, max(0.0, value))
    if clamped != value:
        logger.debug(f"{name} = {value!r} clamped to {clamped}")
    return clamped


def pk_exact(rho: float, k: int) -> float:
    """P(a unit window in [0, 2] holds >= k points) at intensity rho."""
    _require_positive("rho", rho)
    if k < 0:
        raise ParameterValidationError(f"k must be >= 0, got {k}")
    tail = poisson_sf(rho, k)
    # 2S - S^2 = 1 - (1-S)^2 keeps precision when S is close to 1
    head = 2 * tail - tail * tail if tail < 0.5 else 1.0 - poisson_cdf(rho, k - 1) ** 2
    bracket = (k - rho - 1) * poisson_cdf(rho, k - 2) + rho * poisson_pmf(rho, k - 2)
    return _check_probability(f"p^({k}) at rho={rho}", head + poisson_pmf(rho, k) * bracket)


def pk_from_ballot(rho: float, k: int) -> float:
    """p^(k) from the un-simplified sum over the two half counts (n, m)."""
    _require_positive("rho", rho)
    if k < 0:
        raise ParameterValidationError(f"k must be >= 0, got {k}")
    tail = poisson_sf(rho, k)
    total = 2 * tail - tail * tail
    for n in range(1, k):
        for m in range(max(1, k - n), k):
            reach = ballot_reach_probability(n, m, k)
            total += float(reach) * math.exp(poisson_logpmf(rho, n) + poisson_logpmf(rho, m))
    return _check_probability(f"p^({k}) at rho={rho}", total)


def _log_cdf_array(rho: float, ms: np.ndarray) -> np.ndarray:
    values = pdtr(ms, rho)
    with np.errstate(divide="ignore"):
        out = np.log(values)
    for idx in np.nonzero(values < 1e-280)[0]:
        out[idx] = poisson_log_cdf(rho, int(ms[idx]))
    return out


def qk_upper(rho: float, k: int, p: Optional[float] = None) -> float:
    """Upper bound on P(both [0, 2] and [1, 3] hold a unit window with >= k points)."""
    _require_positive("rho", rho)
    if k < 1:
        raise ParameterValidationError(f"k must be >= 1, got {k}")
    tail = poisson_sf(rho, k)
    p = pk_exact(rho, k) if p is None else p
    value = tail + 2 * tail * p
    if k >= 2:
        ms = np.arange(1, k)
        log_pmf = -rho + ms * math.log(rho) - gammaln(ms + 1)
        log_terms = 2 * _log_cdf_array(rho, ms) - log_pmf
        value += math.exp(2 * poisson_logpmf(rho, k) + float(logsumexp(log_terms)))
    return value


def q_bound_terms(rho: float, k: int, p: Optional[float] = None) -> QBoundTerms:
    """qk_upper split into the single-window part I1 and the sums below and above rho."""
    _require_positive("rho", rho)
    if k < 1:
        raise ParameterValidationError(f"k must be >= 1, got {k}")
    tail = poisson_sf(rho, k)
    p = pk_exact(rho, k) if p is None else p
    ms = np.arange(1, k)
    log_terms = 2 * _log_cdf_array(rho, ms) - (-rho + ms * math.log(rho) - gammaln(ms + 1))
    below = ms < rho
    log_i2 = float(logsumexp(log_terms[below])) if below.any() else -math.inf
    log_i3 = float(logsumexp(log_terms[~below])) if (~below).any() else -math.inf
    return QBoundTerms(rho=rho, k=k, i1=tail + 2 * tail * p, log_pmf_k=poisson_logpmf(rho, k),
                       log_i2=log_i2, log_i3=log_i3)


def i2_bound(rho: float) -> float:
    """I2 <= 60 rho."""
    _require_positive("rho", rho)
    return 60.0 * rho


def log_i3_bound(rho: float, epsilon: float) -> float:
    """log of 20 sqrt(rho) exp(rho eps^2 / 2) / eps, a bound on I3 at k = rho (1 + eps)."""
    _require_positive("rho", rho)
    _require_positive("epsilon", epsilon)
    return math.log(20.0) + 0.5 * math.log(rho) + 0.5 * rho * epsilon * epsilon - math.log(epsilon)


def q_asymptotic_bound(rho: float, epsilon: float) -> float:
    """(rho eps^2)^(-1/2) exp(-rho eps^2 / 2): leading order of q^(k) when rho eps^3 -> 0.

    At finite rho the Poisson pmf exceeds its Gaussian approximation by up to
    exp(rho eps^3 / 6), so q^(k) may sit a small factor above this value.
    """
    _require_positive("rho", rho)
    _require_positive("epsilon", epsilon)
    u = rho * epsilon * epsilon
    if u < 10:
        logger.warning(f"q_asymptotic_bound outside its range of validity: rho*eps^2 = {u:.3g} < 10")
    return math.exp(-0.5 * math.log(u) - 0.5 * u)


def scan_pair(rho: float, k: int) -> ScanPair:
    p = pk_exact(rho, k)
    q = qk_upper(rho, k, p=p) if k >= 1 else 1.0
    return ScanPair(rho=rho, k=k, p=p, q_upper=q, tail=poisson_sf(rho, k), pmf_k=poisson_pmf(rho, k))


def pk_asymptotic(rho: float, epsilon: float) -> float:
    """sqrt(rho eps^2 / 2 pi) * exp(-rho eps^2 / 2)."""
    _require_positive("rho", rho)
    _require_positive("epsilon", epsilon)
    u = rho * epsilon * epsilon
    if u < 10:
        logger.warning(f"pk_asymptotic outside its range of validity: rho*eps^2 = {u:.3g} < 10")
    return math.sqrt(u / (2 * math.pi)) * math.exp(-u / 2)


def corollary_cdf(x: float) -> float:
    """Limit law of (M - s)/sqrt(s) for the unit-window maximum on [0, 2]."""
    if not math.isfinite(x):
        raise ParameterValidationError(f"x must be finite, got {x!r}")
    big_phi = float(norm.cdf(x))
    small_phi = float(norm.pdf(x))
    return big_phi * big_phi - small_phi * small_phi - x * big_phi * small_phi


def chen_stein_bound(N: int, p: float, q_upper: float) -> float:
    if N < 1:
        raise ParameterValidationError(f"N must be >= 1, got {N}")
    return 3 * N * p * p + 2 * N * q_upper


def ballot_reach_probability(n: int, m: int, k: int) -> Fraction:
    """Probability that a uniformly ordered path from n with m up and n down steps reaches k."""
    if n < 0 or m < 0:
        raise ParameterValidationError(f"n and m must be >= 0 (n={n}, m={m})")
    if max(n, m) >= k:
        return Fraction(1)
    if n + m < k:
        return Fraction(0)
    return Fraction(comb(n + m, k), comb(n + m, n))


# ---------------------------------------------------------------------------
# Tail bounds for the dimension
# ---------------------------------------------------------------------------

def disjoint_ball_count(r: float, d: int) -> int:
    """floor(1/r)^d disjoint balls of radius r/2 fit in the unit cube."""
    _require_positive("r", r)
    return math.floor(1.0 / r) ** d


def lattice_scan_log_constant(d: int, epsilon: float) -> float:
    _require_positive("epsilon", epsilon)
    return d * math.log(math.sqrt(d) / epsilon + 1.0)


def lower_tail_log_bound(t: float, rho: float, d: int, k: int, sharp: bool = False) -> float:
    """log of an upper bound on P(D < k), from floor(1/r)^d disjoint balls of radius r/2."""
    _require_positive("t", t)
    _require_positive("rho", rho)
    if k < 0:
        raise ParameterValidationError(f"k must be >= 0, got {k}")
    r = (rho / t) ** (1.0 / d)
    balls = disjoint_ball_count(r, d)
    mu = scan_mean_factor(d) * rho
    if sharp:
        return balls * poisson_log_cdf(mu, k)
    return -balls * poisson_pmf(mu, k + 1)


def upper_tail_log_bound(t: float, rho: float, d: int, k: int, epsilon: float, log_C: float) -> float:
    """log of log_C-scaled r^-d e^-mu' (mu' e / k)^k with mu' = mu (1 + eps)^d, for k > mu'."""
    _require_positive("t", t)
    _require_positive("rho", rho)
    _require_positive("epsilon", epsilon)
    r = (rho / t) ** (1.0 / d)
    inflated = scan_mean_factor(d) * rho * (1.0 + epsilon) ** d
    if k <= inflated:
        raise ParameterValidationError(f"upper tail bound needs k > mu(1+eps)^d = {inflated:.6g}, got {k}")
    return log_C + d * math.log(1.0 / r) + chernoff_upper_log(inflated, k)


def markov_bounds(mean_N: float, var_N: float, mean_M: float, n: int) -> MarkovBounds:
    """P(D < n) <= Var N_n / (E N_n)^2 and P(D >= n) <= E M_n / C(n+1, 2)."""
    if n < 1:
        raise ParameterValidationError(f"n must be >= 1, got {n}")
    lower = var_N / mean_N ** 2 if mean_N > 0 else None
    return MarkovBounds(n=n, lower_tail=lower, upper_tail=mean_M / comb(n + 1, 2),
                        markov_upper_printed=2 * mean_M / ((n + 1) * (n + 2)))


def expected_f_vector(t: float, rho: float, d: int, n_max: int, kind: ComplexKind = ComplexKind.vietoris_rips,
                      mu_table: Optional[Dict[int, float]] = None) -> List[float]:
    return [expected_f_n(t, rho, n, mu_n_value(d, n, kind, mu_table)) for n in range(n_max + 1)]
