"""Grid specification for (theta, phi) and rho searches."""

import numpy as np
from pydantic import model_validator

from app.core.exceptions import InvalidParams
from app.models.base import DomainModel


class GridSpec(DomainModel):
    """Grid resolution and chronological validation split."""

    step: float = 0.02
    validation_fraction: float = 0.25

    @model_validator(mode="after")
    def check_grid(self) -> "GridSpec":
        if not (0.0 < self.step <= 0.5):
            raise InvalidParams(f"grid step must lie in (0, 0.5], got {self.step}")
        intervals = 1.0 / self.step
        if abs(intervals - round(intervals)) > 1e-9:
            raise InvalidParams(f"grid step {self.step} does not divide 1 evenly")
        if not (0.0 < self.validation_fraction < 0.5):
            raise InvalidParams(
                f"validation_fraction must lie in (0, 0.5), got {self.validation_fraction}"
            )
        return self

    @property
    def intervals(self) -> int:
        return int(round(1.0 / self.step))

    def values(self) -> np.ndarray:
        """Grid points k/intervals for k = 0..intervals, endpoints exact."""
        n = self.intervals
        return np.array([k / n for k in range(n + 1)])


class GridPoint(DomainModel):
    """Realized validation variance of the combined estimator at (theta, phi)."""

    theta: float
    phi: float
    variance: float
