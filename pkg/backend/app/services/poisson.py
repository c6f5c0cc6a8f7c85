"""Poisson pmf, tails and their classical bounds, evaluated in log space.

The scan probabilities at rho ~ 1e4 involve pmf values near exp(-1e4), so every
quantity is built from ``gammaln`` and exponentiated only at the end.
"""

import math
from typing import Tuple

import numpy as np
from scipy.special import gammaln, logsumexp, pdtr, pdtrc

from app.core.exceptions import ParameterValidationError

# below this the regularised-gamma values lose relative accuracy; switch to summation
_TINY = 1e-280
# terms beyond this many steps from the summation start are negligible once the value is tiny
_SUM_WINDOW = 200_000


def _check_lambda(lam: float) -> None:
    if not isinstance(lam, (int, float)) or not math.isfinite(lam) or lam <= 0:
        raise ParameterValidationError(f"lambda must be a positive finite number, got {lam!r}")


def poisson_logpmf(lam: float, k: int) -> float:
    _check_lambda(lam)
    if k < 0:
        return -math.inf
    return -lam + k * math.log(lam) - float(gammaln(k + 1))


def poisson_pmf(lam: float, k: int) -> float:
    return math.exp(poisson_logpmf(lam, k))


def _logpmf_range(lam: float, lo: int, hi: int) -> np.ndarray:
    ks = np.arange(lo, hi + 1, dtype=float)
    return -lam + ks * math.log(lam) - gammaln(ks + 1)


def poisson_log_cdf(lam: float, k: int) -> float:
    """log P(Po(lam) <= k), summed downward from k where the terms are largest."""
    _check_lambda(lam)
    if k < 0:
        return -math.inf
    direct = float(pdtr(k, lam))
    if direct >= _TINY:
        return math.log(direct)
    return float(logsumexp(_logpmf_range(lam, max(0, k - _SUM_WINDOW), k)))


def poisson_log_sf(lam: float, k: int) -> float:
    """log P(Po(lam) >= k), summed upward from k."""
    _check_lambda(lam)
    if k <= 0:
        return 0.0
    direct = float(pdtrc(k - 1, lam))
    if direct >= _TINY:
        return math.log(direct)
    return float(logsumexp(_logpmf_range(lam, k, k + _SUM_WINDOW)))


def poisson_cdf(lam: float, k: int) -> float:
    """P(Po(lam) <= k); 0 for k < 0."""
    return math.exp(poisson_log_cdf(lam, k))


def poisson_sf(lam: float, k: int) -> float:
    """P(Po(lam) >= k); 1 for k <= 0, so that cdf(k) + sf(k + 1) = 1."""
    return math.exp(poisson_log_sf(lam, k))


def chernoff_upper_log(lam: float, k: float) -> float:
    _check_lambda(lam)
    if k < lam:
        raise ParameterValidationError(f"upper Chernoff bound needs k >= lambda (k={k}, lambda={lam})")
    return -lam + k * (1.0 + math.log(lam) - math.log(k))


def chernoff_lower_log(lam: float, k: float) -> float:
    _check_lambda(lam)
    if k < 0 or k > lam:
        raise ParameterValidationError(f"lower Chernoff bound needs 0 <= k <= lambda (k={k}, lambda={lam})")
    if k == 0:
        return -lam
    return -lam + k * (1.0 + math.log(lam) - math.log(k))


def chernoff_upper(lam: float, k: float) -> float:
    """e^-lam (e lam / k)^k, an upper bound on P(Po(lam) >= k) for k >= lam."""
    return math.exp(chernoff_upper_log(lam, k))


def chernoff_lower(lam: float, k: float) -> float:
    """e^-lam (e lam / k)^k, an upper bound on P(Po(lam) <= k) for k <= lam."""
    return math.exp(chernoff_lower_log(lam, k))


def poisson_pmf_bounds(lam: float, k: int) -> Tuple[float, float]:
    """Stirling sandwich e^-lam (lam e/k)^k / (3 sqrt(2 pi k)) < pmf < e^-lam (lam e/k)^k / sqrt(2 pi k)."""
    _check_lambda(lam)
    if k < 1:
        raise ParameterValidationError(f"pmf bounds need k >= 1, got {k}")
    base = -lam + k * (1.0 + math.log(lam) - math.log(k)) - 0.5 * math.log(2 * math.pi * k)
    return math.exp(base - math.log(3.0)), math.exp(base)


def stirling_bounds(n: int) -> Tuple[float, float]:
    """(lower, upper) bounds on log(n!)."""
    if n < 1:
        raise ParameterValidationError(f"Stirling bounds need n >= 1, got {n}")
    core = 0.5 * math.log(2 * math.pi * n) + n * math.log(n) - n
    return core + 1.0 / (12 * n + 1), core + 1.0 / (12 * n)
