from enum import Enum
from typing import List

import numpy as np
from pydantic import (BaseModel, ConfigDict, Field, ValidationInfo, field_serializer, field_validator,
                      model_validator)

from app.core.exceptions import ParameterValidationError


class WindowShape(str, Enum):
    unit_interval = "unit_interval"
    unit_cube = "unit_cube"


class Window(BaseModel):
    """Unit-volume observation window: [0, 1] or [0, 1]^d."""

    model_config = ConfigDict(frozen=True)

    dim: int = Field(ge=1)
    shape: WindowShape = WindowShape.unit_cube

    @model_validator(mode="after")
    def _interval_is_one_dimensional(self) -> "Window":
        if self.shape == WindowShape.unit_interval and self.dim != 1:
            raise ValueError("unit_interval window requires dim = 1")
        return self

    @property
    def volume(self) -> float:
        return 1.0

    @classmethod
    def interval(cls) -> "Window":
        return cls(dim=1, shape=WindowShape.unit_interval)

    @classmethod
    def cube(cls, dim: int) -> "Window":
        return cls(dim=dim, shape=WindowShape.unit_cube)


class PointMeta(BaseModel):
    model_config = ConfigDict(frozen=True)

    intensity: float = Field(gt=0)
    seed: int = Field(ge=0, lt=2**64)
    trial_index: int = Field(ge=0)


class PointConfiguration(BaseModel):
    """A finite point set in [0, 1]^d, rows in generation order."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dim: int = Field(ge=1)
    points: np.ndarray
    meta: PointMeta

    @field_validator("points", mode="before")
    @classmethod
    def _as_array(cls, value, info: ValidationInfo):
        dim = info.data.get("dim", 1)
        arr = np.array(value, dtype=float, copy=True)
        if arr.size == 0:
            return arr.reshape(0, dim)
        if arr.ndim == 1 and dim == 1:
            arr = arr.reshape(-1, 1)
        return arr

    @model_validator(mode="after")
    def _check_points(self) -> "PointConfiguration":
        if self.points.ndim != 2 or self.points.shape[1] != self.dim:
            raise ValueError(f"points must have shape (n, {self.dim}), got {self.points.shape}")
        if self.points.size and (not np.all(np.isfinite(self.points))
                                 or self.points.min() < 0.0 or self.points.max() > 1.0):
            raise ValueError("every coordinate must lie in [0, 1]")
        self.points.setflags(write=False)
        return self

    @field_serializer("points")
    def _serialize_points(self, points: np.ndarray) -> List[List[float]]:
        return points.tolist()

    def __len__(self) -> int:
        return int(self.points.shape[0])

    @property
    def n(self) -> int:
        return len(self)

    @classmethod
    def from_points(cls, points, dim: int = None, intensity: float = 1.0, seed: int = 0,
                    trial_index: int = 0) -> "PointConfiguration":
        arr = np.asarray(points, dtype=float)
        if dim is None:
            dim = 1 if arr.ndim == 1 else int(arr.shape[1])
        return cls(dim=dim, points=arr,
                   meta=PointMeta(intensity=intensity, seed=seed, trial_index=trial_index))

    def to_text(self) -> str:
        """Line format: header `d t seed trial_index n`, then one point per line."""
        lines = [f"{self.dim} {self.meta.intensity!r} {self.meta.seed} {self.meta.trial_index} {self.n}"]
        for row in self.points:
            lines.append(" ".join(f"{c:.17g}" for c in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PointConfiguration":
        # comment lines carry the provenance header written by the CLI
        lines = [line for line in text.strip().splitlines() if line.strip() and not line.lstrip().startswith("#")]
        rows = [line.split() for line in lines]
        if not rows or len(rows[0]) != 5:
            raise ParameterValidationError("configuration header must read `d t seed trial_index n`")
        d, t, seed, trial_index, n = rows[0]
        dim, count = int(d), int(n)
        body = rows[1:]
        if len(body) != count:
            raise ParameterValidationError(f"header announces {count} points, found {len(body)}")
        points = np.array([[float(c) for c in row] for row in body], dtype=float).reshape(count, dim)
        return cls(dim=dim, points=points,
                   meta=PointMeta(intensity=float(t), seed=int(seed), trial_index=int(trial_index)))
