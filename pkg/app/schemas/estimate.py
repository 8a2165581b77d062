"""Covariance estimate and portfolio schemas."""

from pydantic import Field

from app.models.backtest import ShrinkageMethod
from app.models.covariance import EstimatorKind
from app.schemas.base import BaseSchema
from app.schemas.panel import PanelPayload


class EstimateRequest(BaseSchema):
    """Estimator choice and optional fixed parameters."""

    panel: PanelPayload
    estimator: EstimatorKind = Field(EstimatorKind.COMBINED)
    theta: float | None = Field(None, ge=0, le=1, description="F share of phi")
    phi: float | None = Field(None, ge=0, le=1, description="Weight off the SCM")
    rho: float | None = Field(None, ge=0, le=1, description="Fixed shrinkage intensity")
    shrinkage_method: ShrinkageMethod = Field(ShrinkageMethod.VALIDATION)
    grid_step: float | None = Field(None, description="Tuning grid step")
    validation_fraction: float | None = Field(None, description="Held-out share of the window")
    annual_return: float | None = Field(None, description="Annual return target")


class EstimateResponse(BaseSchema):
    estimator: EstimatorKind
    assets: list[str]
    matrix: list[list[float]]
    params: dict[str, float] = Field(default_factory=dict)


class PortfolioRequest(EstimateRequest):
    relax_infeasible: bool = Field(
        True, description="Drop an unreachable return target instead of failing"
    )


class PortfolioResponse(BaseSchema):
    """Minimum-variance weights with in-sample risk."""

    estimator: EstimatorKind
    assets: list[str]
    weights: list[float]
    daily_variance: float
    annualized_risk_pct: float
    daily_return_target: float
    params: dict[str, float] = Field(default_factory=dict)
    warnings: list[str] = Field(default_factory=list)
    iterations: int
