"""Spiked population model specification."""

from enum import StrEnum

import numpy as np
from pydantic import Field, model_validator

from app.core.exceptions import InvalidSpec
from app.models.base import DomainModel


class Distribution(StrEnum):
    GAUSSIAN = "gaussian"
    STUDENT_T = "student_t"


class Spike(DomainModel):
    """Population eigenvalue above the bulk, optionally with its direction."""

    eigenvalue: float
    direction: list[float] | None = None


class SpikeSpec(DomainModel):
    """NULL (no spikes) or SPIKE population with a sampling distribution."""

    dim: int
    spikes: list[Spike] = Field(default_factory=list)
    base_variance: float = 1.0
    distribution: Distribution = Distribution.GAUSSIAN
    nu: float | None = None
    temporal_ar1: float = 0.0

    @model_validator(mode="after")
    def check_spec(self) -> "SpikeSpec":
        if self.dim < 2:
            raise InvalidSpec(f"dim must be >= 2, got {self.dim}")
        if len(self.spikes) > self.dim:
            raise InvalidSpec("more spikes than dimensions")
        if not self.base_variance > 0:
            raise InvalidSpec("base_variance must be positive")
        for spike in self.spikes:
            if not spike.eigenvalue > 1.0:
                raise InvalidSpec(f"spike eigenvalue {spike.eigenvalue} must exceed 1")
        with_direction = [s.direction is not None for s in self.spikes]
        if any(with_direction) and not all(with_direction):
            raise InvalidSpec("give directions for all spikes or for none")
        if self.spikes and all(with_direction):
            if any(len(s.direction or []) != self.dim for s in self.spikes):
                raise InvalidSpec("spike direction length must equal dim")
            u = self.directions()
            if np.abs(u.T @ u - np.eye(u.shape[1])).max() > 1e-10:
                raise InvalidSpec("spike directions must be orthonormal")
        if self.distribution == Distribution.STUDENT_T:
            if self.nu is None or not self.nu > 2:
                raise InvalidSpec("student_t requires nu > 2 for finite variance")
        if not (0.0 <= self.temporal_ar1 < 1.0):
            raise InvalidSpec("temporal_ar1 must lie in [0, 1)")
        return self

    def directions(self) -> np.ndarray:
        """dim x k matrix of spike directions; standard basis when unspecified."""
        k = len(self.spikes)
        if k and self.spikes[0].direction is not None:
            return np.column_stack(
                [np.asarray(s.direction, dtype=float) for s in self.spikes]
            )
        return np.eye(self.dim)[:, :k]


class SeedEvaluation(DomainModel):
    """Frobenius distance of every estimator to the population matrix for one seed."""

    seed: int
    errors: dict[str, float]
    theta: float
    phi: float
    rho: float
