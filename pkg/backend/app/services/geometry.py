"""Exact metric primitives: threshold graphs, diameters and minimum enclosing balls."""

import itertools
import logging
import math
from collections import defaultdict
from typing import Iterator, List, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from app.core.config import settings
from app.core.exceptions import ParameterValidationError
from app.models.geometry import AdjacencyStructure, EnclosingBall
from app.models.pointprocess import PointConfiguration

logger = logging.getLogger(__name__)


def check_radius(r: float, name: str = "r") -> None:
    if not isinstance(r, (int, float)) or not math.isfinite(r) or r <= 0:
        raise ParameterValidationError(f"{name} must be a positive finite number, got {r!r}")


def as_point_array(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ParameterValidationError("expected a nonempty list of d-vectors")
    return arr


def close_pairs(points: np.ndarray, radius: float) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Yield index arrays (i, j), i < j, of all pairs at distance <= radius.

    Points are binned on a uniform grid of cell side ``radius`` so only adjacent
    cells are compared.
    """
    n, d = points.shape
    if n < 2:
        return
    keys = np.floor(points / radius).astype(np.int64)
    buckets = defaultdict(list)
    for idx, key in enumerate(map(tuple, keys)):
        buckets[key].append(idx)
    buckets = {key: np.asarray(members) for key, members in buckets.items()}
    limit = radius * radius
    offsets = list(itertools.product((-1, 0, 1), repeat=d))
    for key, members in buckets.items():
        for offset in offsets:
            other_key = tuple(a + b for a, b in zip(key, offset))
            if other_key < key or other_key not in buckets:
                continue
            others = buckets[other_key]
            diff = points[members][:, None, :] - points[others][None, :, :]
            ii, jj = np.nonzero(np.einsum("ijk,ijk->ij", diff, diff) <= limit)
            a, b = members[ii], others[jj]
            if other_key == key:
                keep = a < b
                a, b = a[keep], b[keep]
            else:
                a, b = np.minimum(a, b), np.maximum(a, b)
            if a.size:
                yield a, b


def _mask_from_indices(indices: np.ndarray, n: int) -> int:
    row = np.zeros(n, dtype=bool)
    row[indices] = True
    return int.from_bytes(np.packbits(row, bitorder="little").tobytes(), "little")


def build_adjacency(config: PointConfiguration, r: float) -> AdjacencyStructure:
    check_radius(r)
    n = config.n
    neighbours: List[List[np.ndarray]] = [[] for _ in range(n)]
    for a, b in close_pairs(config.points, r + settings.geometric_tolerance):
        for i, j in zip(a.tolist(), b.tolist()):
            neighbours[i].append(j)
            neighbours[j].append(i)
    masks = tuple(_mask_from_indices(np.asarray(nbrs, dtype=np.int64), n) if nbrs else 0
                  for nbrs in neighbours)
    return AdjacencyStructure(n=n, neighbors=masks)


def _ball_from_support(points: np.ndarray, support: Sequence[int]) -> Tuple[np.ndarray, float]:
    """Smallest ball with every support point on its boundary."""
    if not support:
        return np.zeros(points.shape[1]), -1.0
    base = points[support[0]]
    if len(support) == 1:
        return base.copy(), 0.0
    rel = points[list(support[1:])] - base
    gram = rel @ rel.T
    rhs = 0.5 * np.diag(gram)
    coeffs = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    center = base + coeffs @ rel
    return center, float(np.linalg.norm(center - base))


def _move_to_front(points: np.ndarray, order: List[int], end: int, support: List[int],
                   tol: float) -> Tuple[np.ndarray, float, List[int]]:
    center, radius = _ball_from_support(points, support)
    basis = list(support)
    if len(support) == points.shape[1] + 1:
        return center, radius, basis
    pos = 0
    while pos < end:
        i = order[pos]
        if radius < 0 or np.linalg.norm(points[i] - center) > radius + tol:
            center, radius, basis = _move_to_front(points, order, pos, support + [i], tol)
            order.pop(pos)
            order.insert(0, i)
        pos += 1
    return center, radius, basis


def _brute_force_ball(points: np.ndarray, tol: float) -> Tuple[np.ndarray, float, List[int]]:
    n, d = points.shape
    best = None
    for size in range(1, min(n, d + 1) + 1):
        for subset in itertools.combinations(range(n), size):
            center, radius = _ball_from_support(points, list(subset))
            if best is not None and radius >= best[1]:
                continue
            if np.all(np.linalg.norm(points - center, axis=1) <= radius + tol):
                best = (center, radius, list(subset))
    return best


def min_enclosing_ball(points) -> EnclosingBall:
    """Exact minimum enclosing ball by the move-to-front support-set recursion.

    The support basis never exceeds d + 1 points, so the recursion depth is d + 1.
    """
    arr = as_point_array(points)
    tol = settings.geometric_tolerance
    if arr.shape[1] == 1:
        lo, hi = int(np.argmin(arr[:, 0])), int(np.argmax(arr[:, 0]))
        support = (lo,) if lo == hi else (lo, hi)
        center = 0.5 * (arr[lo, 0] + arr[hi, 0])
        return EnclosingBall(center=(float(center),), radius=0.5 * float(arr[hi, 0] - arr[lo, 0]),
                             support=support)
    order = list(range(arr.shape[0]))
    center, radius, basis = _move_to_front(arr, order, len(order), [], tol)
    if np.any(np.linalg.norm(arr - center, axis=1) > radius + tol):
        # degenerate support (coincident or affinely dependent points)
        logger.debug(f"move-to-front left points outside, falling back to subset search (n={arr.shape[0]})")
        center, radius, basis = _brute_force_ball(arr, tol)
    return EnclosingBall(center=tuple(float(c) for c in center), radius=max(radius, 0.0),
                         support=tuple(sorted(basis)))


def meb_radius(points: np.ndarray) -> float:
    return min_enclosing_ball(points).radius


def diameter(points) -> float:
    arr = as_point_array(points)
    n = arr.shape[0]
    if n == 1:
        return 0.0
    best = 0.0
    chunk = max(1, 1_000_000 // n)
    for start in range(0, n, chunk):
        block = cdist(arr[start:start + chunk], arr)
        best = max(best, float(block.max()))
    return best
