"""Grid tuning schemas."""

from typing import Any

from pydantic import Field

from app.schemas.base import BaseSchema
from app.schemas.panel import PanelPayload


class TuningRequest(BaseSchema):
    panel: PanelPayload
    grid_step: float | None = Field(None, description="Grid step for theta and phi")
    validation_fraction: float | None = Field(None, description="Held-out share of the window")
    annual_return: float | None = Field(None, description="Annual return target")


class GridPointSchema(BaseSchema):
    theta: float
    phi: float
    variance: float


class TuningResponse(BaseSchema):
    """Selected weights and the full validation-variance surface."""

    theta: float
    phi: float
    surface: list[GridPointSchema]
    config: dict[str, Any] = Field(default_factory=dict)
