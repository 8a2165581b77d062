"""Portfolio and return forecast domain values."""

import math
from typing import Any

import numpy as np
from pydantic import Field, field_validator, model_validator

from app.core.exceptions import InvalidParams
from app.models.base import DomainModel, frozen_array

NONNEGATIVE_TOL = 1e-12
BUDGET_TOL = 1e-9

RETURN_CONSTRAINT_RELAXED = "return_constraint_relaxed"


class Portfolio(DomainModel):
    """Long-only fully invested weight vector."""

    weights: np.ndarray
    warnings: list[str] = Field(default_factory=list)
    iterations: int = 0

    @field_validator("weights", mode="before")
    @classmethod
    def freeze_weights(cls, v: Any) -> np.ndarray:
        return frozen_array(v, ndim=1)

    @model_validator(mode="after")
    def check_simplex(self) -> "Portfolio":
        p = self.weights
        if not np.isfinite(p).all():
            raise InvalidParams("portfolio weights must be finite")
        if (p < -NONNEGATIVE_TOL).any():
            raise InvalidParams(f"negative weight {p.min():.3e}")
        if abs(p.sum() - 1.0) > BUDGET_TOL:
            raise InvalidParams(f"weights sum to {p.sum():.12f}, expected 1")
        return self

    @property
    def relaxed(self) -> bool:
        return RETURN_CONSTRAINT_RELAXED in self.warnings


class ReturnForecast(DomainModel):
    """Predicted daily returns g and minimum daily expected return."""

    g: np.ndarray
    r_daily: float

    @field_validator("g", mode="before")
    @classmethod
    def freeze_g(cls, v: Any) -> np.ndarray:
        return frozen_array(v, ndim=1)

    @model_validator(mode="after")
    def check_finite(self) -> "ReturnForecast":
        if not np.isfinite(self.g).all():
            raise InvalidParams("forecast returns must be finite")
        if math.isnan(self.r_daily) or self.r_daily == math.inf:
            raise InvalidParams("r_daily must be finite or -inf")
        return self

    @classmethod
    def unconstrained(cls, m: int) -> "ReturnForecast":
        """Forecast whose return constraint never binds."""
        return cls(g=np.zeros(m), r_daily=-math.inf)
