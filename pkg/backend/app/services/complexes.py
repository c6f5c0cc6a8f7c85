"""Dimension and face statistics of Vietoris-Rips and Čech complexes on one realisation.

Vertex sets are handled as int bitmasks over the configuration's row indices.
"""

import logging
import math
from typing import Iterator, List, Optional, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from app.core.config import settings
from app.core.exceptions import InstanceTooLargeError, ParameterValidationError
from app.models.complexes import ComplexKind, ComplexSummary
from app.models.geometry import AdjacencyStructure
from app.models.pointprocess import PointConfiguration
from app.services.geometry import build_adjacency, check_radius, meb_radius, min_enclosing_ball

logger = logging.getLogger(__name__)


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def window_max_count(x: np.ndarray, width: float) -> int:
    """Largest number of sorted values in a closed window [x_i, x_i + width]."""
    if x.size == 0:
        return 0
    ends = np.searchsorted(x, x + width, side="right")
    return int(np.max(ends - np.arange(x.size)))


# ---------------------------------------------------------------------------
# Maximum clique
# ---------------------------------------------------------------------------

def degeneracy_order(adj: AdjacencyStructure) -> List[int]:
    """Repeatedly remove a vertex of minimum remaining degree."""
    n = adj.n
    degree = [adj.degree(i) for i in range(n)]
    buckets = [set() for _ in range(max(degree, default=0) + 1)]
    for v, deg in enumerate(degree):
        buckets[deg].add(v)
    removed = [False] * n
    order = []
    low = 0
    for _ in range(n):
        low = max(low - 1, 0)
        while not buckets[low]:
            low += 1
        v = min(buckets[low])
        buckets[low].discard(v)
        removed[v] = True
        order.append(v)
        for u in iter_bits(adj.neighbors[v]):
            if not removed[u]:
                buckets[degree[u]].discard(u)
                degree[u] -= 1
                buckets[degree[u]].add(u)
    return order


def _colour_sort(candidates: int, neighbors) -> Tuple[List[int], List[int]]:
    """Greedy colouring of the candidate set; colour classes are independent sets."""
    order, colours = [], []
    uncoloured = candidates
    colour = 0
    while uncoloured:
        colour += 1
        available = uncoloured
        while available:
            low = available & -available
            v = low.bit_length() - 1
            available &= ~low & ~neighbors[v]
            uncoloured &= ~low
            order.append(v)
            colours.append(colour)
    return order, colours


class _CliqueSearch:
    def __init__(self, adj: AdjacencyStructure):
        self.neighbors = adj.neighbors
        self.best = 1 if adj.n else 0

    def expand(self, size: int, candidates: int) -> None:
        order, colours = _colour_sort(candidates, self.neighbors)
        for idx in range(len(order) - 1, -1, -1):
            if size + colours[idx] <= self.best:
                return
            v = order[idx]
            inner = candidates & self.neighbors[v]
            if inner:
                self.expand(size + 1, inner)
            elif size + 1 > self.best:
                self.best = size + 1
            candidates &= ~(1 << v)


def max_clique_size(adj: AdjacencyStructure) -> int:
    """Clique number by branch and bound with greedy-colouring bounds.

    Each vertex is searched only together with its neighbours later in the
    degeneracy order, which keeps every subproblem local.
    """
    if adj.n == 0:
        return 0
    search = _CliqueSearch(adj)
    later = (1 << adj.n) - 1
    for v in degeneracy_order(adj):
        later &= ~(1 << v)
        candidates = adj.neighbors[v] & later
        if popcount(candidates) + 1 <= search.best:
            continue
        search.expand(1, candidates)
    return search.best


# ---------------------------------------------------------------------------
# Dimensions
# ---------------------------------------------------------------------------

def vr_dimension(config: PointConfiguration, r: float) -> int:
    check_radius(r)
    if config.n == 0:
        return -1
    if config.dim == 1:
        # cliques on a line are exactly the point sets of diameter <= r
        x = np.sort(config.points[:, 0])
        return window_max_count(x, r + settings.geometric_tolerance) - 1
    return max_clique_size(build_adjacency(config, r)) - 1


def cech_dimension_1d(config: PointConfiguration, r: float) -> int:
    if config.dim != 1:
        raise ParameterValidationError(f"cech_dimension_1d needs d = 1, got d = {config.dim}")
    check_radius(r)
    if config.n == 0:
        return -1
    x = np.sort(config.points[:, 0])
    return window_max_count(x, r + settings.geometric_tolerance) - 1


def cech_dimension(config: PointConfiguration, r: float) -> int:
    """Largest number of points in a closed ball of radius r/2, minus one.

    Candidate centres are the enclosing-ball centres of all subsets of at most
    d + 1 points whose enclosing radius is <= r/2.
    """
    check_radius(r)
    if config.n == 0:
        return -1
    if config.dim == 1:
        return cech_dimension_1d(config, r)
    if config.n > settings.cech_exact_max_points:
        raise InstanceTooLargeError(
            f"exact Čech enumeration is capped at {settings.cech_exact_max_points} points "
            f"(got {config.n}); use grid_scan_bracket instead")
    adj = build_adjacency(config, r)
    points = config.points
    reach = r / 2 + settings.geometric_tolerance
    best = 1
    for support in _enumerate_faces(points, adj, ComplexKind.cech, r, config.dim + 1):
        if len(support) < 2:
            continue
        ball = min_enclosing_ball(points[list(support)])
        nearby = adj.neighbors[support[0]] | (1 << support[0])
        for v in support[1:]:
            nearby &= adj.neighbors[v] | (1 << v)
        idx = np.fromiter(iter_bits(nearby), dtype=np.int64)
        covered = int(np.count_nonzero(np.linalg.norm(points[idx] - np.asarray(ball.center), axis=1) <= reach))
        best = max(best, covered)
    return best - 1


def dimension(config: PointConfiguration, r: float, kind: ComplexKind) -> int:
    if kind == ComplexKind.vietoris_rips:
        return vr_dimension(config, r)
    return cech_dimension(config, r)


# ---------------------------------------------------------------------------
# Face enumeration
# ---------------------------------------------------------------------------

def _enumerate_faces(points: np.ndarray, adj: AdjacencyStructure, kind: ComplexKind, r: float,
                     max_size: int) -> Iterator[Tuple[int, ...]]:
    """Every face with at most ``max_size`` vertices, as increasing index tuples.

    Both complexes are downward closed, so a rejected prefix is never extended.
    """
    limit = r / 2 + settings.geometric_tolerance

    def extend(prefix: Tuple[int, ...], candidates: int) -> Iterator[Tuple[int, ...]]:
        yield prefix
        if len(prefix) == max_size:
            return
        for v in iter_bits(candidates):
            face = prefix + (v,)
            if kind == ComplexKind.cech and len(face) >= 3 and meb_radius(points[list(face)]) > limit:
                continue
            higher = candidates >> (v + 1) << (v + 1)
            yield from extend(face, higher & adj.neighbors[v])

    for v in range(adj.n):
        yield from extend((v,), adj.neighbors[v] >> (v + 1) << (v + 1))


def f_vector(config: PointConfiguration, r: float, kind: ComplexKind, n_max: int) -> List[int]:
    check_radius(r)
    if n_max < 0:
        raise ParameterValidationError(f"n_max must be >= 0, got {n_max}")
    counts = [0] * (n_max + 1)
    if config.n == 0:
        return counts
    adj = build_adjacency(config, r)
    for face in _enumerate_faces(config.points, adj, kind, r, n_max + 1):
        counts[len(face) - 1] += 1
    return counts


def face_participation(config: PointConfiguration, r: float, kind: ComplexKind, n: int) -> Tuple[int, int]:
    """(N_n, M_n): points lying in some n-face and point pairs sharing some n-face."""
    check_radius(r)
    if n < 0:
        raise ParameterValidationError(f"n must be >= 0, got {n}")
    if config.n == 0:
        return 0, 0
    adj = build_adjacency(config, r)
    members = 0
    pairs = set()
    for face in _enumerate_faces(config.points, adj, kind, r, n + 1):
        if len(face) != n + 1:
            continue
        for v in face:
            members |= 1 << v
        pairs.update((face[a], face[b]) for a in range(len(face)) for b in range(a + 1, len(face)))
    return popcount(members), len(pairs)


def grid_scan_bracket(config: PointConfiguration, r: float, h: float) -> Tuple[int, int]:
    """Bracket the radius-r/2 scan statistic by scanning grid centres of spacing h.

    ``lower`` uses radius r/2 at each centre; ``upper`` inflates it by h*sqrt(d)/2, the
    largest distance from a point of the cube to its nearest centre.
    """
    check_radius(r)
    check_radius(h, "h")
    if config.n == 0:
        return 0, 0
    d = config.dim
    per_axis = max(1, math.ceil(1.0 / h))
    total = per_axis ** d
    tol = settings.geometric_tolerance
    inner = r / 2 + tol
    outer = r / 2 + h * math.sqrt(d) / 2 + tol
    chunk = max(1, 2_000_000 // config.n)
    lower = upper = 0
    for start in range(0, total, chunk):
        flat = np.arange(start, min(start + chunk, total))
        centres = h * (np.stack(np.unravel_index(flat, (per_axis,) * d), axis=1) + 0.5)
        dist = cdist(centres, config.points)
        lower = max(lower, int((dist <= inner).sum(axis=1).max()))
        upper = max(upper, int((dist <= outer).sum(axis=1).max()))
    logger.debug(f"grid scan over {total} centres: lower={lower}, upper={upper}")
    return lower, upper


def summarize(config: PointConfiguration, r: float, kind: ComplexKind, n_max: Optional[int] = None,
              participation_n: Optional[int] = None) -> ComplexSummary:
    dim = dimension(config, r, kind)
    fv = f_vector(config, r, kind, n_max) if n_max is not None else None
    part = None
    if participation_n is not None:
        part = [face_participation(config, r, kind, n) for n in range(participation_n + 1)]
    return ComplexSummary(kind=kind, dimension=dim, point_count=config.n, f_vector=fv, participation=part)
