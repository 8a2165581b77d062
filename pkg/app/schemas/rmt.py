"""Marchenko-Pastur density curve schemas."""

from pydantic import Field

from app.schemas.base import BaseSchema


class DensityPoint(BaseSchema):
    x: float
    density: float
    empirical_density: float | None = None


class MpDensityResponse(BaseSchema):
    c: float
    sigma2: float
    lower: float
    upper: float
    points: list[DensityPoint]
    ks_distance: float | None = Field(None, description="Against the supplied panel spectrum")
    spectrum_split: dict[str, int] | None = None
