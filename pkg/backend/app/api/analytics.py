from fastapi import APIRouter, HTTPException, Query
from typing import Any, Dict, List, Optional
import logging
import math

from app.api.errors import to_http_error
from app.models.analytics import GumbelConstants, PredictionRecord, RegimeKind, RegimeSpec, ScanPair
from app.models.complexes import ComplexKind
from app.services import analytics, poisson

router = APIRouter(prefix="/api/analytics", tags=["analytics"])

logger = logging.getLogger(__name__)


def _encode(value: float):
    # JSON has no infinity
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


@router.get("/predict", response_model=PredictionRecord)
def predict(
    regime: RegimeKind,
    t: float = Query(gt=0),
    rho: float = Query(gt=0),
    d: int = Query(default=1, ge=1),
    B: Optional[float] = Query(default=None, gt=0),
    complex: str = "vr",
):
    """Regime predictor for the dimension at (t, rho)."""
    try:
        spec = RegimeSpec(d=d, t=t, rho=rho, regime=regime, B=B)
        return analytics.predict_dimension(spec, kind=ComplexKind.parse(complex))
    except HTTPException:
        raise
    except Exception as e:
        raise to_http_error(e, "compute prediction")


@router.get("/pq", response_model=List[ScanPair])
def scan_probabilities(rho: float = Query(gt=0), k: List[int] = Query(...)):
    """Exact p^(k) and the q^(k) upper bound, one entry per k."""
    try:
        return [analytics.scan_pair(rho, value) for value in k]
    except Exception as e:
        raise to_http_error(e, "compute scan probabilities")


@router.get("/gumbel")
def gumbel(t: float = Query(gt=0), rho: float = Query(gt=0), x: List[float] = Query(default=[0.0])) -> Dict[str, Any]:
    try:
        constants: GumbelConstants = analytics.gumbel_constants(t, rho)
        return {
            "constants": constants,
            "points": [{"x": value, "k_t": analytics.k_t(t, rho, value),
                        "epsilon_t": analytics.epsilon_t(t, rho, value),
                        "gumbel_cdf": analytics.gumbel_cdf(value)} for value in x],
        }
    except Exception as e:
        raise to_http_error(e, "compute Gumbel constants")


@router.get("/ldp-rate")
def ldp_rate(regime: RegimeKind, x: float, B: Optional[float] = Query(default=None, gt=0)) -> Dict[str, Any]:
    try:
        return {"regime": regime, "x": x, "rate": _encode(analytics.ldp_rate(regime, x, B))}
    except Exception as e:
        raise to_http_error(e, "evaluate rate function")


@router.get("/corollary-cdf")
def corollary_cdf(x: float) -> Dict[str, float]:
    try:
        return {"x": x, "cdf": analytics.corollary_cdf(x)}
    except Exception as e:
        raise to_http_error(e, "evaluate limit law")


@router.get("/poisson")
def poisson_summary(lam: float = Query(gt=0), k: int = Query(ge=0)) -> Dict[str, Any]:
    """logpmf, cdf and sf of Po(lam) at k, with whichever Chernoff bound applies."""
    try:
        body: Dict[str, Any] = {
            "lam": lam,
            "k": k,
            "logpmf": poisson.poisson_logpmf(lam, k),
            "cdf": poisson.poisson_cdf(lam, k),
            "sf": poisson.poisson_sf(lam, k),
        }
        if k >= lam:
            body["chernoff_upper"] = poisson.chernoff_upper(lam, k)
        if k <= lam:
            body["chernoff_lower"] = poisson.chernoff_lower(lam, k)
        if k >= 1:
            body["pmf_bounds"] = list(poisson.poisson_pmf_bounds(lam, k))
        return body
    except Exception as e:
        raise to_http_error(e, "evaluate Poisson quantities")


@router.get("/expected-f")
def expected_f(
    t: float = Query(gt=0),
    rho: float = Query(gt=0),
    d: int = Query(default=1, ge=1),
    n_max: int = Query(default=3, ge=0, le=16),
    complex: str = "vr",
) -> Dict[str, Any]:
    """E f_0 .. E f_n_max; mu_n is estimated for d > 1."""
    try:
        values = analytics.expected_f_vector(t, rho, d, n_max, ComplexKind.parse(complex))
        return {"t": t, "rho": rho, "d": d, "expected_f": values}
    except Exception as e:
        raise to_http_error(e, "compute expected f-vector")
