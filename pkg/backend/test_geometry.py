import math

import numpy as np
import pytest
from scipy.spatial.distance import cdist, pdist

from app.core.exceptions import ParameterValidationError
from app.models.geometry import AdjacencyStructure
from app.models.pointprocess import PointConfiguration
from app.services.geometry import build_adjacency, check_radius, close_pairs, diameter, min_enclosing_ball


def test_adjacency_of_points_on_a_line():
    config = PointConfiguration.from_points([0.0, 0.1, 0.4])
    adj = build_adjacency(config, 0.25)
    assert adj.edges() == [(0, 1)]
    assert adj.degree(2) == 0
    assert adj.edge_count == 1


def test_adjacency_edge_at_exactly_r_is_included():
    config = PointConfiguration.from_points([[0.0, 0.0], [0.5, 0.0]])
    assert build_adjacency(config, 0.5).has_edge(0, 1)


def test_close_pairs_match_all_pairs(rng):
    points = rng.random((250, 3))
    radius = 0.15
    found = set()
    for a, b in close_pairs(points, radius):
        found.update(zip(a.tolist(), b.tolist()))
    dist = cdist(points, points)
    expected = {(i, j) for i in range(250) for j in range(i + 1, 250) if dist[i, j] <= radius}
    assert found == expected


def test_from_edges_is_symmetric():
    adj = AdjacencyStructure.from_edges(4, [(0, 1), (2, 1), (3, 3)])
    assert adj.has_edge(1, 0) and adj.has_edge(1, 2)
    assert not adj.has_edge(3, 3)
    assert adj.edges() == [(0, 1), (1, 2)]


def test_enclosing_ball_of_equilateral_triangle(triangle):
    ball = min_enclosing_ball(triangle.points)
    assert ball.radius == pytest.approx(0.5 / math.sqrt(3), abs=1e-12)
    assert len(ball.support) == 3


def test_enclosing_ball_of_obtuse_triangle_is_half_the_longest_side():
    ball = min_enclosing_ball([[0.1, 0.1], [0.9, 0.1], [0.5, 0.2]])
    assert ball.radius == pytest.approx(0.4, abs=1e-12)
    assert np.allclose(ball.center, [0.5, 0.1], atol=1e-12)
    assert ball.support == (0, 1)


def test_enclosing_ball_in_one_dimension():
    ball = min_enclosing_ball([0.3, 0.9, 0.1])
    assert ball.radius == pytest.approx(0.4)
    assert ball.center == pytest.approx((0.5,))


@pytest.mark.parametrize("d", [2, 3, 4])
def test_enclosing_ball_is_minimal_on_random_sets(rng, d):
    for _ in range(20):
        points = rng.random((int(rng.integers(2, 30)), d))
        ball = min_enclosing_ball(points)
        dist = np.linalg.norm(points - np.asarray(ball.center), axis=1)
        assert np.all(dist <= ball.radius + 1e-9)
        # every support point sits on the boundary
        assert np.allclose(dist[list(ball.support)], ball.radius, atol=1e-9)
        assert ball.radius >= pdist(points).max() / 2 - 1e-12


def test_enclosing_ball_handles_duplicates():
    ball = min_enclosing_ball([[0.2, 0.2], [0.2, 0.2], [0.6, 0.2]])
    assert ball.radius == pytest.approx(0.2, abs=1e-12)


def test_diameter_matches_pdist(rng):
    points = rng.random((300, 2))
    assert diameter(points) == pytest.approx(pdist(points).max())
    assert diameter([[0.5, 0.5]]) == 0.0


@pytest.mark.parametrize("r", [0.0, -0.1, math.inf, math.nan])
def test_radius_must_be_positive_and_finite(r):
    with pytest.raises(ParameterValidationError):
        check_radius(r)


@pytest.mark.parametrize("d", [2, 3])
def test_enclosing_ball_ignores_point_order(rng, d):
    for _ in range(20):
        points = rng.random((int(rng.integers(2, 25)), d))
        ball = min_enclosing_ball(points)
        shuffled = min_enclosing_ball(points[rng.permutation(len(points))])
        assert shuffled.radius == pytest.approx(ball.radius, abs=1e-10)
        assert np.allclose(shuffled.center, ball.center, atol=1e-8)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_enclosing_radius_lies_between_half_diameter_and_jung_bound(rng, d):
    for _ in range(30):
        points = rng.random((int(rng.integers(2, 30)), d))
        diam = diameter(points)
        radius = min_enclosing_ball(points).radius
        assert diam / 2 - 1e-12 <= radius <= diam * math.sqrt(d / (2 * (d + 1))) + 1e-12
