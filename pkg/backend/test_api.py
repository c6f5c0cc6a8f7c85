import math

import numpy as np
import pytest
from fastapi.testclient import TestClient

from app.core.config import settings
from app.models.pointprocess import Window
from app.services.pointprocess import sample_poisson
from main import app

client = TestClient(app)


def test_root_and_health():
    assert client.get("/").json()["status"] == "healthy"
    health = client.get("/health").json()
    assert health["version"] == settings.tool_version
    assert health["service"] == "rgc-dim"


def test_predict_dense_regime():
    response = client.get("/api/analytics/predict", params={"regime": "dense", "t": 1e4, "rho": 80.0, "d": 2})
    assert response.status_code == 200
    assert response.json()["prediction"] == pytest.approx(math.pi / 4 * 80.0)


def test_predict_rejects_radius_above_one():
    response = client.get("/api/analytics/predict", params={"regime": "dense", "t": 10.0, "rho": 80.0})
    assert response.status_code == 422


def test_scan_probabilities():
    response = client.get("/api/analytics/pq", params={"rho": math.log(2.0), "k": [1, 2]})
    assert response.status_code == 200
    first, second = response.json()
    assert first["p"] == pytest.approx(0.75, abs=1e-12)
    assert second["k"] == 2


def test_gumbel_points_carry_the_limit_cdf():
    response = client.get("/api/analytics/gumbel", params={"t": 1e5, "rho": 132.5, "x": [-1.0, 0.0]})
    assert response.status_code == 200
    low, mid = response.json()["points"]
    assert mid["gumbel_cdf"] == pytest.approx(math.exp(-1.0))
    assert low["gumbel_cdf"] == pytest.approx(math.exp(-math.e))
    assert low["k_t"] < mid["k_t"]


def test_gumbel_domain_error():
    response = client.get("/api/analytics/gumbel", params={"t": 5.0, "rho": 5.0})
    assert response.status_code == 400
    assert "t > rho" in response.json()["detail"]


def test_infinite_rate_is_reported_as_a_string():
    body = client.get("/api/analytics/ldp-rate", params={"regime": "intermediate", "x": 0.5}).json()
    assert body["rate"] == "inf"
    finite = client.get("/api/analytics/ldp-rate", params={"regime": "dense", "x": 1.0}).json()
    assert finite["rate"] == pytest.approx(0.0)


def test_expected_f_vector():
    body = client.get("/api/analytics/expected-f", params={"t": 100.0, "rho": 0.5, "n_max": 1}).json()
    assert body["expected_f"] == pytest.approx([100.0, 50.0])


def test_dimension_of_posted_points():
    payload = {"points": [[0.2, 0.2], [0.7, 0.2], [0.45, 0.633]], "r": 0.5, "kind": "cech", "n_max": 2}
    response = client.post("/api/simulation/dimension", json=payload)
    assert response.status_code == 200
    body = response.json()
    assert body["dimension"] == 1
    assert body["f_vector"] == [3, 3, 0]


def test_sample_matches_the_library():
    response = client.post("/api/simulation/sample",
                           json={"d": 2, "shape": "unit_cube", "t": 20.0, "seed": 3})
    assert response.status_code == 200
    expected = sample_poisson(Window.cube(2), 20.0, 3)
    assert np.array_equal(np.asarray(response.json()["points"]).reshape(-1, 2), expected.points)


def test_small_experiment():
    payload = {"window": {"dim": 1, "shape": "unit_interval"}, "t_values": [200.0], "trials": 10,
               "rho_rule": {"kind": "constant", "c": 2.0}, "master_seed": 5}
    response = client.post("/api/simulation/experiment", json=payload)
    assert response.status_code == 200
    (summary,) = response.json()
    assert summary["trials"] == 10
    assert sum(summary["counts"].values()) == 10


def test_experiment_over_budget_is_refused():
    payload = {"window": {"dim": 1, "shape": "unit_interval"}, "t_values": [200.0],
               "trials": settings.max_http_trials + 1, "rho_rule": {"kind": "constant", "c": 2.0}}
    assert client.post("/api/simulation/experiment", json=payload).status_code == 400


def test_invalid_experiment_body():
    payload = {"window": {"dim": 1}, "t_values": [200.0], "trials": 0, "rho_rule": {"kind": "constant"}}
    assert client.post("/api/simulation/experiment", json=payload).status_code == 422


def test_pq_simulation():
    response = client.post("/api/simulation/pq", json={"rho": 2.0, "k": 3, "trials": 2000, "seed": 1})
    assert response.status_code == 200
    assert 0.0 <= response.json()["p_hat"] <= 1.0


def test_corollary_cdf_at_zero():
    body = client.get("/api/analytics/corollary-cdf", params={"x": 0.0}).json()
    assert body["cdf"] == pytest.approx(0.25 - 1.0 / (2.0 * math.pi))


def test_poisson_summary():
    body = client.get("/api/analytics/poisson", params={"lam": 2.0, "k": 2}).json()
    assert body["logpmf"] == pytest.approx(math.log(2.0) - 2.0)
    assert body["cdf"] == pytest.approx(5.0 * math.exp(-2.0))
    assert body["sf"] == pytest.approx(1.0 - 3.0 * math.exp(-2.0))
    assert body["chernoff_upper"] == pytest.approx(1.0)
    lower, upper = body["pmf_bounds"]
    assert lower < 2.0 * math.exp(-2.0) < upper


def test_poisson_summary_omits_bounds_off_their_domain():
    body = client.get("/api/analytics/poisson", params={"lam": 5.0, "k": 0}).json()
    assert "chernoff_upper" not in body and "pmf_bounds" not in body
    assert body["chernoff_lower"] == pytest.approx(math.exp(-5.0))


def test_dimension_of_a_sampled_configuration():
    payload = {"sample": {"d": 1, "t": 50.0, "seed": 4}, "r": 0.05, "kind": "vr"}
    response = client.post("/api/simulation/dimension", json=payload)
    assert response.status_code == 200
    assert response.json()["point_count"] == sample_poisson(Window.interval(), 50.0, 4).n


def test_dimension_needs_exactly_one_source():
    payload = {"points": [[0.1]], "sample": {"d": 1, "t": 5.0}, "r": 0.1}
    assert client.post("/api/simulation/dimension", json=payload).status_code == 422
