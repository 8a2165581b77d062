"""Pydantic schemas package."""

from app.schemas.backtest import BacktestDocument, BacktestRequest, BacktestResponse
from app.schemas.base import BaseSchema
from app.schemas.estimate import (
    EstimateRequest,
    EstimateResponse,
    PortfolioRequest,
    PortfolioResponse,
)
from app.schemas.panel import PanelPayload
from app.schemas.rmt import DensityPoint, MpDensityResponse
from app.schemas.synthetic import SeedRow, SyntheticRequest, SyntheticResponse
from app.schemas.tuning import GridPointSchema, TuningRequest, TuningResponse

__all__ = [
    "BaseSchema",
    "PanelPayload",
    # Estimates
    "EstimateRequest",
    "EstimateResponse",
    "PortfolioRequest",
    "PortfolioResponse",
    # Tuning
    "TuningRequest",
    "TuningResponse",
    "GridPointSchema",
    # Backtest
    "BacktestRequest",
    "BacktestDocument",
    "BacktestResponse",
    # RMT
    "DensityPoint",
    "MpDensityResponse",
    # Synthetic
    "SyntheticRequest",
    "SyntheticResponse",
    "SeedRow",
]
