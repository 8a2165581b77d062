"""Backtest request and report schemas.

The report document is shared by the API response and the CLI JSON output.
"""

import datetime as dt
from typing import Any

from pydantic import Field

from app.models.backtest import BacktestReport, RankingRow, ShrinkageMethod
from app.models.covariance import EstimatorKind
from app.schemas.base import BaseSchema
from app.schemas.panel import PanelPayload


class BacktestRequest(BaseSchema):
    panel: PanelPayload
    train_len: int | None = Field(None, ge=2, description="Training window in days")
    rebalance_every: list[int] | None = Field(None, description="Holding periods in days")
    annual_return: float | None = Field(None, description="Annual return target")
    estimators: list[EstimatorKind] | None = Field(None, description="Estimators to compare")
    grid_step: float | None = None
    validation_fraction: float | None = None
    shrinkage_method: ShrinkageMethod = Field(ShrinkageMethod.VALIDATION)
    rho_step: float | None = None


class RebalanceEntry(BaseSchema):
    date: dt.date
    weights: list[float]
    params: dict[str, float]
    warnings: list[str]


class EstimatorEntry(BaseSchema):
    name: str
    rebalance_every: int
    annualized_risk_pct: float
    mean_daily_return: float
    rebalances: list[RebalanceEntry]


class RankingEntry(BaseSchema):
    name: str
    rebalance_every: int
    annualized_risk_pct: float
    mean_daily_return: float
    warnings: int


class BacktestDocument(BaseSchema):
    """Report for one or more rebalance frequencies."""

    config: dict[str, Any]
    estimators: list[EstimatorEntry]

    @classmethod
    def from_reports(
        cls, reports: list[BacktestReport], provenance: dict[str, Any]
    ) -> "BacktestDocument":
        first = reports[0].config
        config = {
            **provenance,
            "assets": list(reports[0].assets),
            "train_len": first.train_len,
            "rebalance_every": [r.config.rebalance_every for r in reports],
            "annual_return_target": first.annual_return_target,
            "estimators": [k.value for k in first.estimators],
            "grid_step": first.grid.step,
            "validation_fraction": first.grid.validation_fraction,
            "shrinkage_method": first.shrinkage_method.value,
            "rho_step": first.rho_step,
        }
        entries = [
            EstimatorEntry(
                name=result.name.value,
                rebalance_every=result.rebalance_every,
                annualized_risk_pct=result.annualized_risk_pct,
                mean_daily_return=result.mean_daily_return,
                rebalances=[
                    RebalanceEntry(
                        date=rec.date,
                        weights=rec.weights.tolist(),
                        params=dict(rec.params),
                        warnings=list(rec.warnings),
                    )
                    for rec in result.rebalances
                ],
            )
            for report in reports
            for result in report.results
        ]
        return cls(config=config, estimators=entries)


class BacktestResponse(BacktestDocument):
    ranking: list[RankingEntry] = Field(default_factory=list)

    @staticmethod
    def ranking_entries(rows: list[RankingRow]) -> list[RankingEntry]:
        return [
            RankingEntry(
                name=row.name.value,
                rebalance_every=row.rebalance_every,
                annualized_risk_pct=row.annualized_risk_pct,
                mean_daily_return=row.mean_daily_return,
                warnings=row.warnings,
            )
            for row in rows
        ]
