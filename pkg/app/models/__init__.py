"""
Immutable domain values shared by the services.

Arrays held by these models are read-only copies.
"""

from app.models.backtest import (
    BacktestConfig,
    BacktestReport,
    EstimatorResult,
    RankingRow,
    RebalanceRecord,
    ShrinkageMethod,
)
from app.models.base import DomainModel
from app.models.covariance import (
    CombinationWeights,
    CovarianceEstimate,
    EstimatorKind,
    MpBounds,
    MpParams,
    SpectralDecomposition,
)
from app.models.panel import ReturnsPanel, WindowSpec
from app.models.portfolio import Portfolio, ReturnForecast
from app.models.synthetic import Distribution, SeedEvaluation, Spike, SpikeSpec
from app.models.tuning import GridPoint, GridSpec

__all__ = [
    "DomainModel",
    # Returns
    "ReturnsPanel",
    "WindowSpec",
    # Covariance
    "EstimatorKind",
    "CovarianceEstimate",
    "SpectralDecomposition",
    "CombinationWeights",
    "MpParams",
    "MpBounds",
    # Portfolio
    "Portfolio",
    "ReturnForecast",
    # Tuning
    "GridSpec",
    "GridPoint",
    # Backtest
    "BacktestConfig",
    "BacktestReport",
    "EstimatorResult",
    "RebalanceRecord",
    "RankingRow",
    "ShrinkageMethod",
    # Synthetic
    "Spike",
    "SpikeSpec",
    "Distribution",
    "SeedEvaluation",
]
