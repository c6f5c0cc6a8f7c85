import math
from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from app.models.analytics import RegimeKind
from app.models.complexes import ComplexKind
from app.models.pointprocess import Window


class RhoRuleKind(str, Enum):
    power = "power"            # c * t^(-alpha)
    constant = "constant"      # c
    log = "log"                # c * ln t
    log_power = "log_power"    # c * (ln t)^gamma, gamma > 1
    table = "table"            # explicit t -> rho


class RhoRule(BaseModel):
    kind: RhoRuleKind
    c: float = Field(default=1.0, gt=0)
    alpha: float = 0.0
    gamma: float = 2.0
    table: Dict[float, float] = {}

    @model_validator(mode="after")
    def _check_parameters(self) -> "RhoRule":
        if self.kind == RhoRuleKind.log_power and self.gamma <= 1:
            raise ValueError("log_power rule requires gamma > 1")
        if self.kind == RhoRuleKind.table and not self.table:
            raise ValueError("table rule requires at least one (t, rho) entry")
        return self

    def __call__(self, t: float) -> float:
        if self.kind == RhoRuleKind.power:
            return self.c * t ** (-self.alpha)
        if self.kind == RhoRuleKind.constant:
            return self.c
        if self.kind == RhoRuleKind.log:
            return self.c * math.log(t)
        if self.kind == RhoRuleKind.log_power:
            return self.c * math.log(t) ** self.gamma
        for key, value in self.table.items():
            if math.isclose(key, t, rel_tol=1e-12):
                return value
        raise ValueError(f"rho table has no entry for t={t}")


class ExperimentConfig(BaseModel):
    window: Window
    complex: ComplexKind = ComplexKind.vietoris_rips
    t_values: List[float] = Field(min_length=1)
    rho_rule: RhoRule
    trials: int = Field(ge=1)
    master_seed: int = Field(default=0, ge=0, lt=2**64)
    target_k: Optional[int] = Field(default=None, ge=0)
    moments: List[int] = [1, 2]
    n_max: Optional[int] = Field(default=None, ge=0, description="record f_0..f_n_max per trial")
    participation_n: Optional[int] = Field(default=None, ge=0, description="record (N_n, M_n) per trial")
    regime: Optional[RegimeKind] = None

    @field_validator("t_values")
    @classmethod
    def _positive_intensities(cls, values: List[float]) -> List[float]:
        for t in values:
            if not math.isfinite(t) or t <= 0:
                raise ValueError(f"every t must be positive and finite, got {t}")
        return values

    @model_validator(mode="after")
    def _radius_below_one(self) -> "ExperimentConfig":
        for t in self.t_values:
            rho = self.rho_rule(t)
            if rho <= 0:
                raise ValueError(f"rho_rule gives rho={rho} <= 0 at t={t}")
            r_t = self.radius(t)
            if not r_t < 1.0:
                raise ValueError(f"rho_rule gives r_t={r_t} >= 1 at t={t}")
        return self

    def rho(self, t: float) -> float:
        return self.rho_rule(t)

    def radius(self, t: float) -> float:
        return (self.rho_rule(t) / t) ** (1.0 / self.window.dim)


class TrialRecord(BaseModel):
    t: float
    trial_index: int = Field(ge=0)
    dimension: int = Field(ge=-1)
    runtime_ns: int = Field(ge=0)
    point_count: int = Field(ge=0)
    fixed_ball_count: int = Field(ge=0)
    f_vector: Optional[List[int]] = None
    participation: Optional[Tuple[int, int]] = None


class MomentEstimate(BaseModel):
    m: int
    value: float
    stderr: float


class EmpiricalSummary(BaseModel):
    t: float
    rho: float
    r_t: float
    trials: int
    seed: int
    counts: Dict[int, int]
    moments: List[MomentEstimate] = []
    two_point_k: Optional[int] = None
    two_point_mass: Optional[float] = None
    max_dimension: int
    max_fixed_ball_count: int

    @model_validator(mode="after")
    def _frequencies_sum_to_trials(self) -> "EmpiricalSummary":
        if sum(self.counts.values()) != self.trials:
            raise ValueError("dimension frequencies must sum to the number of trials")
        return self

    @property
    def pmf(self) -> Dict[int, float]:
        return {dim: count / self.trials for dim, count in sorted(self.counts.items())}


class TwoPointEstimate(BaseModel):
    t: float
    k: int
    mass: float = Field(ge=0.0, le=1.0)
    stderr: float
    radius: float = Field(description="3-sigma binomial confidence radius")
    trials: int


class XkSimulation(BaseModel):
    t: float
    rho: float
    k: int
    N: int
    trials: int
    samples: List[int]
    mean: float
    stderr: float
    tv: float
    tv_error: float


class PqEstimate(BaseModel):
    rho: float
    k: int
    trials: int
    p_hat: float
    q_hat: float
    p_stderr: float
    q_stderr: float


class LdpEstimate(BaseModel):
    t: float
    a: float
    n_t: float
    m_t: float
    threshold: float
    probability: float
    estimate: float
    stderr: float
    floored: bool = False


class ParticipationSummary(BaseModel):
    t: float
    n: int
    trials: int
    mean_N: float
    var_N: float
    mean_M: float
    p_below: float
    p_at_least: float
    stderr_below: float
    stderr_at_least: float
    markov_lower_tail: Optional[float] = None
    markov_upper_tail: float
    markov_upper_printed: float


class GumbelPoint(BaseModel):
    x: float
    empirical: float = Field(ge=0.0, le=1.0, description="fraction of trials with (D - a_t) / b_t <= x")
    stderr: float
    limit: float = Field(ge=0.0, le=1.0)


class StandardizedDimension(BaseModel):
    """Empirical law of (D - a_t) / b_t for the one-dimensional complex against its Gumbel limit."""

    t: float
    rho: float
    a: float
    b: float
    trials: int
    seed: int
    mean: float = Field(description="mean of (D - a_t) / b_t")
    points: List[GumbelPoint]
