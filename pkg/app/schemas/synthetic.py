"""Synthetic evaluation schemas."""

from enum import StrEnum

from pydantic import Field

from app.models.synthetic import Distribution
from app.schemas.base import BaseSchema


class PopulationModel(StrEnum):
    NULL = "null"
    SPIKE = "spike"


class SyntheticRequest(BaseSchema):
    """Population, sampling law and seeds for a Frobenius-error study."""

    model: PopulationModel = PopulationModel.SPIKE
    m: int = Field(100, ge=2, description="Number of assets")
    n: int = Field(200, ge=2, description="Number of days")
    spikes: list[float] = Field(default_factory=lambda: [10.0])
    distribution: Distribution = Distribution.GAUSSIAN
    nu: float | None = Field(None, description="Degrees of freedom for student_t")
    ar1: float = Field(0.0, ge=0, lt=1, description="AR(1) coefficient of the innovations")
    seeds: int = Field(20, ge=1, description="Number of seeds")
    first_seed: int | None = Field(None, ge=0, description="Seed of the first run")
    direction_seed: int | None = Field(
        None, description="Draw random spike directions from this seed"
    )


class SeedRow(BaseSchema):
    seed: int
    errors: dict[str, float]
    theta: float
    phi: float
    rho: float


class SyntheticResponse(BaseSchema):
    rows: list[SeedRow]
