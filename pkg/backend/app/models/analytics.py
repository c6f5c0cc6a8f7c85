import math
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, model_validator


class RegimeKind(str, Enum):
    power_sparse = "power_sparse"
    intermediate = "intermediate"
    critical = "critical"
    dense = "dense"


class RegimeSpec(BaseModel):
    """One asymptotic setting: intensity t, density rho = t * r_t^d and its regime tag."""

    d: int = Field(ge=1)
    t: float = Field(gt=0)
    rho: float = Field(gt=0)
    regime: RegimeKind
    B: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _check_regime(self) -> "RegimeSpec":
        if self.regime == RegimeKind.critical and (self.B is None or not math.isfinite(self.B)):
            raise ValueError("critical regime requires a finite B > 0")
        if not 0.0 < self.r_t < 1.0:
            raise ValueError(f"r_t = (rho/t)^(1/d) = {self.r_t} must lie in (0, 1)")
        return self

    @property
    def r_t(self) -> float:
        return (self.rho / self.t) ** (1.0 / self.d)


class ScanPair(BaseModel):
    rho: float = Field(gt=0)
    k: int = Field(ge=0)
    p: float = Field(ge=0.0, le=1.0)
    q_upper: float = Field(ge=0.0)
    tail: float = Field(ge=0.0, le=1.0, description="P(Po(rho) >= k)")
    pmf_k: float = Field(ge=0.0, le=1.0, description="P(Po(rho) = k)")


class GumbelConstants(BaseModel):
    a: float
    b: float = Field(gt=0)


def _exp(value: float) -> float:
    try:
        return math.exp(value)
    except OverflowError:
        return math.inf


class QBoundTerms(BaseModel):
    """Pieces of the q^(k) bound, total = i1 + P(Po = k)^2 (I2 + I3).

    I2 and I3 sum F(m)^2 / P(Po = m) over 1 <= m < rho and rho <= m < k. Both are
    kept as logs since I3 grows like exp(rho eps^2 / 2).
    """

    rho: float = Field(gt=0)
    k: int = Field(ge=1)
    i1: float = Field(ge=0)
    log_pmf_k: float
    log_i2: float
    log_i3: float

    @property
    def i2(self) -> float:
        return _exp(self.log_i2)

    @property
    def i3(self) -> float:
        return _exp(self.log_i3)

    @property
    def total(self) -> float:
        return self.i1 + math.exp(2 * self.log_pmf_k + self.log_i2) + math.exp(2 * self.log_pmf_k + self.log_i3)


class TwoPointLaw(BaseModel):
    """Limit law taking k-1 with probability e^-lam and k otherwise."""

    k: int = Field(ge=1)
    lam: float = Field(ge=0)
    p_lower: float
    p_upper: float
    moments: Dict[int, float] = {}


class PredictionRecord(BaseModel):
    spec: RegimeSpec
    prediction: float
    k: Optional[int] = None
    lam: Optional[float] = None
    beta: Optional[float] = None
    two_point: Optional[TwoPointLaw] = None
    expected_f: List[float] = []
    note: str = ""


class MarkovBounds(BaseModel):
    n: int = Field(ge=1)
    lower_tail: Optional[float] = Field(default=None, description="bound on P(D < n)")
    upper_tail: float = Field(description="bound on P(D >= n), denominator C(n+1, 2)")
    markov_upper_printed: float
