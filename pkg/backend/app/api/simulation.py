from fastapi import APIRouter
from pydantic import BaseModel, Field, model_validator
from typing import Any, Dict, List, Optional
import logging

from app.api.errors import to_http_error
from app.core.config import settings
from app.core.exceptions import ParameterValidationError
from app.models.complexes import ComplexKind, ComplexSummary
from app.models.experiment import EmpiricalSummary, ExperimentConfig, PqEstimate
from app.models.pointprocess import PointConfiguration, Window, WindowShape
from app.services import complexes, montecarlo
from app.services.pointprocess import sample_poisson

router = APIRouter(prefix="/api/simulation", tags=["simulation"])

logger = logging.getLogger(__name__)


class SampleRequest(BaseModel):
    d: int = Field(default=1, ge=1)
    shape: Optional[WindowShape] = None
    t: float = Field(gt=0)
    seed: int = Field(default=0, ge=0, lt=2**64)
    trial_index: int = Field(default=0, ge=0)

    def window(self) -> Window:
        if self.shape is None:
            return Window.interval() if self.d == 1 else Window.cube(self.d)
        return Window(dim=self.d, shape=self.shape)

    def draw(self) -> PointConfiguration:
        return sample_poisson(self.window(), self.t, self.seed, self.trial_index)


class DimensionRequest(BaseModel):
    points: Optional[List[List[float]]] = None
    sample: Optional[SampleRequest] = None
    r: float = Field(gt=0)
    kind: str = "vr"
    n_max: Optional[int] = Field(default=None, ge=0, le=8)
    participation_n: Optional[int] = Field(default=None, ge=1, le=8)

    @model_validator(mode="after")
    def _one_source(self) -> "DimensionRequest":
        if (self.points is None) == (self.sample is None):
            raise ValueError("give exactly one of 'points' or 'sample'")
        return self


class PqRequest(BaseModel):
    rho: float = Field(gt=0)
    k: int = Field(ge=0)
    trials: int = Field(ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)


def _check_budget(trials: int) -> None:
    if trials > settings.max_http_trials:
        raise ParameterValidationError(
            f"requested {trials} trials; the HTTP limit is {settings.max_http_trials}, use the CLI instead"
        )


@router.post("/sample")
def sample(request: SampleRequest) -> Dict[str, Any]:
    try:
        return request.draw().model_dump(mode="json")
    except Exception as e:
        raise to_http_error(e, "sample configuration")


@router.post("/dimension", response_model=ComplexSummary)
def dimension(request: DimensionRequest):
    """Dimension, plus the f-vector and face participation when asked for."""
    try:
        if request.sample is not None:
            config = request.sample.draw()
        else:
            config = PointConfiguration.from_points(request.points)
        return complexes.summarize(config, request.r, ComplexKind.parse(request.kind),
                                   n_max=request.n_max, participation_n=request.participation_n)
    except Exception as e:
        raise to_http_error(e, "compute dimension")


@router.post("/experiment", response_model=List[EmpiricalSummary])
def experiment(config: ExperimentConfig):
    try:
        _check_budget(config.trials * len(config.t_values))
        logger.info(f"HTTP experiment: {len(config.t_values)} t values x {config.trials} trials")
        return montecarlo.run_dimension_experiment(config)
    except Exception as e:
        raise to_http_error(e, "run experiment")


@router.post("/pq", response_model=PqEstimate)
def pq(request: PqRequest):
    try:
        _check_budget(request.trials)
        return montecarlo.mc_pq(request.rho, request.k, request.trials, request.seed)
    except Exception as e:
        raise to_http_error(e, "simulate scan probabilities")
