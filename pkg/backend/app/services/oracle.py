"""Slow reference implementations for cross-checking the optimised code paths.

Nothing here shares helpers with the optimised modules; every routine enforces a
hard instance-size cap instead of subsampling.
"""

import itertools
import logging
import math
from fractions import Fraction
from typing import List

import numpy as np
from scipy import integrate

from app.core.config import settings
from app.core.exceptions import InstanceTooLargeError, ParameterValidationError
from app.models.complexes import ComplexKind
from app.models.geometry import AdjacencyStructure

logger = logging.getLogger(__name__)


def brute_max_clique(adjacency: AdjacencyStructure) -> int:
    """Largest clique, by growing every clique one increasing vertex at a time."""
    n = adjacency.n
    if n > settings.oracle_max_clique_vertices:
        raise InstanceTooLargeError(f"clique oracle is capped at {settings.oracle_max_clique_vertices} vertices, got {n}")
    best = 0

    def grow(clique: List[int], start: int) -> None:
        nonlocal best
        best = max(best, len(clique))
        for v in range(start, n):
            if all(adjacency.has_edge(u, v) for u in clique):
                grow(clique + [v], v + 1)

    grow([], 0)
    return best


def exhaustive_enclosing_radius(points) -> float:
    """Minimum enclosing radius by trying the circumcentre of every subset of at most d + 1 points.

    The optimal ball is the circumball of its support, so the smallest of these
    candidate centres, each scored by its farthest point, is the exact radius.
    """
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    m, d = arr.shape
    if m == 0:
        return 0.0
    best = math.inf
    for size in range(1, min(m, d + 1) + 1):
        subsets = np.array(list(itertools.combinations(range(m), size)))
        base = arr[subsets[:, 0]]
        if size == 1:
            centres = base
        else:
            # c = p0 + A^T lam with 2 A A^T lam = |p_i - p0|^2, solved in the affine hull
            spans = arr[subsets[:, 1:]] - base[:, None, :]
            gram = spans @ spans.transpose(0, 2, 1)
            rhs = 0.5 * np.diagonal(gram, axis1=1, axis2=2)
            lam = np.einsum("kij,kj->ki", np.linalg.pinv(gram), rhs)
            centres = base + np.einsum("ki,kid->kd", lam, spans)
        farthest = np.max(np.sum((arr[None, :, :] - centres[:, None, :]) ** 2, axis=2), axis=1)
        best = min(best, float(np.sqrt(farthest.min())))
    return best


def _fits_in_ball(points: np.ndarray, limit: float) -> bool:
    d = points.shape[1]
    diam = max((float(np.linalg.norm(a - b)) for a, b in itertools.combinations(points, 2)), default=0.0)
    if diam / 2 > limit:
        return False
    if d == 1:
        return True
    # Jung: every set of diameter D fits in a ball of radius D * sqrt(d / (2(d+1)))
    if diam * math.sqrt(d / (2.0 * (d + 1))) <= limit:
        return True
    return exhaustive_enclosing_radius(points) <= limit


def brute_cech_count(points, r: float) -> int:
    """Largest subset whose minimum enclosing ball has radius <= r/2."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    n = arr.shape[0]
    if n > settings.oracle_max_cech_points:
        raise InstanceTooLargeError(f"Čech oracle is capped at {settings.oracle_max_cech_points} points, got {n}")
    if not r > 0:
        raise ParameterValidationError(f"r must be positive, got {r}")
    limit = r / 2 + settings.geometric_tolerance
    best = 0

    def grow(members: List[int], start: int) -> None:
        nonlocal best
        best = max(best, len(members))
        for v in range(start, n):
            candidate = members + [v]
            if len(candidate) == 1 or _fits_in_ball(arr[candidate], limit):
                grow(candidate, v + 1)

    grow([], 0)
    return best


def enumerate_ballot(n: int, m: int, k: int) -> Fraction:
    """Fraction of the C(n+m, n) step orders from level n (m up, n down) that ever reach k."""
    if n < 0 or m < 0:
        raise ParameterValidationError(f"n and m must be >= 0 (n={n}, m={m})")
    if n + m > settings.oracle_max_ballot_steps:
        raise InstanceTooLargeError(f"ballot oracle is capped at {settings.oracle_max_ballot_steps} steps, got {n + m}")
    steps = n + m
    reached = total = 0
    for ups in itertools.combinations(range(steps), m):
        up_positions = set(ups)
        level = n
        hit = level >= k
        for step in range(steps):
            level += 1 if step in up_positions else -1
            hit = hit or level >= k
        reached += hit
        total += 1
    return Fraction(reached, total)


def quadrature_mu_n(d: int, n: int, kind: ComplexKind = ComplexKind.vietoris_rips) -> float:
    """mu_n for d = 1 by nested quadrature.

    The last point is integrated in closed form: given the others, it ranges over an
    interval of length 2 - (spread of {0, x_1, ..., x_{n-1}}).
    """
    if d != 1 or not 1 <= n <= 3:
        raise ParameterValidationError(f"quadrature oracle supports d = 1 and n in 1..3, got d={d}, n={n}")
    # in one dimension both complexes test the same interval condition, so kind is not consulted
    opts = {"epsabs": 1e-12, "epsrel": 1e-12, "limit": 200}
    if n == 1:
        return 2.0
    if n == 2:
        value, _ = integrate.quad(lambda x: 2.0 - abs(x), -1.0, 1.0, points=[0.0], **opts)
        return value

    def inner(x1: float) -> float:
        def spread(x2: float) -> float:
            return 2.0 - (max(0.0, x1, x2) - min(0.0, x1, x2))

        lo, hi = max(0.0, x1) - 1.0, min(0.0, x1) + 1.0
        if hi <= lo:
            return 0.0
        breaks = sorted(p for p in {0.0, x1} if lo < p < hi)
        value, _ = integrate.quad(spread, lo, hi, points=breaks or None, **opts)
        return value

    value, _ = integrate.quad(inner, -1.0, 1.0, points=[0.0], **opts)
    return value
