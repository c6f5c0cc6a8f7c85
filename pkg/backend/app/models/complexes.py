from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator


class ComplexKind(str, Enum):
    vietoris_rips = "vietoris_rips"
    cech = "cech"

    @classmethod
    def parse(cls, value: str) -> "ComplexKind":
        aliases = {"vr": cls.vietoris_rips, "rips": cls.vietoris_rips, "čech": cls.cech}
        key = value.strip().lower()
        return aliases.get(key) or cls(key)


class ComplexSummary(BaseModel):
    kind: ComplexKind
    dimension: int = Field(ge=-1)
    point_count: int = Field(ge=0)
    f_vector: Optional[List[int]] = None
    participation: Optional[List[Tuple[int, int]]] = None

    @model_validator(mode="after")
    def _f_vector_matches_dimension(self) -> "ComplexSummary":
        if self.f_vector is None:
            return self
        if self.f_vector and self.f_vector[0] != self.point_count:
            raise ValueError("f_0 must equal the point count")
        for n, f_n in enumerate(self.f_vector):
            if (f_n > 0) != (n <= self.dimension):
                raise ValueError(f"f_{n} = {f_n} is inconsistent with dimension {self.dimension}")
        return self
