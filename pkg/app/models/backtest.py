"""Backtest configuration and results."""

import datetime as dt
from enum import StrEnum
from typing import Any

import numpy as np
from pydantic import Field, field_validator, model_validator

from app.core.exceptions import InvalidParams
from app.models.base import DomainModel, frozen_array
from app.models.covariance import ESTIMATOR_KINDS, EstimatorKind
from app.models.tuning import GridSpec


class ShrinkageMethod(StrEnum):
    """How the linear shrinkage intensity is chosen."""

    VALIDATION = "validation"
    ANALYTIC = "analytic"


class BacktestConfig(DomainModel):
    """Rolling-window protocol: fit on train_len days, hold for rebalance_every."""

    train_len: int = 200
    rebalance_every: int = 30
    annual_return_target: float = 0.10
    estimators: list[EstimatorKind] = Field(
        default_factory=lambda: list(ESTIMATOR_KINDS)
    )
    grid: GridSpec = Field(default_factory=GridSpec)
    shrinkage_method: ShrinkageMethod = ShrinkageMethod.VALIDATION
    rho_step: float = 0.05

    @model_validator(mode="after")
    def check_config(self) -> "BacktestConfig":
        if self.train_len < 2:
            raise InvalidParams("train_len must be >= 2")
        if self.rebalance_every < 1:
            raise InvalidParams("rebalance_every must be >= 1")
        if not self.estimators:
            raise InvalidParams("at least one estimator is required")
        if EstimatorKind.POPULATION in self.estimators:
            raise InvalidParams("population is not an estimator")
        if len(set(self.estimators)) != len(self.estimators):
            raise InvalidParams("estimators must be unique")
        return self


class RebalanceRecord(DomainModel):
    """One refit: first holding day, weights, tuned parameters, warnings."""

    date: dt.date
    weights: np.ndarray
    params: dict[str, float] = Field(default_factory=dict)
    warnings: list[str] = Field(default_factory=list)

    @field_validator("weights", mode="before")
    @classmethod
    def freeze_weights(cls, v: Any) -> np.ndarray:
        return frozen_array(v, ndim=1)


class EstimatorResult(DomainModel):
    """Out-of-sample record of a single estimator."""

    name: EstimatorKind
    rebalance_every: int
    realized: np.ndarray
    annualized_risk_pct: float
    mean_daily_return: float
    rebalances: list[RebalanceRecord]

    @field_validator("realized", mode="before")
    @classmethod
    def freeze_realized(cls, v: Any) -> np.ndarray:
        return frozen_array(v, ndim=1)

    @property
    def warning_count(self) -> int:
        return sum(len(r.warnings) for r in self.rebalances)


class BacktestReport(DomainModel):
    """Per-estimator results of one backtest run."""

    config: BacktestConfig
    assets: list[str]
    results: list[EstimatorResult]


class RankingRow(DomainModel):
    name: EstimatorKind
    rebalance_every: int
    annualized_risk_pct: float
    mean_daily_return: float
    warnings: int
