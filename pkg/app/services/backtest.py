"""Rolling-window out-of-sample evaluation of minimum-variance portfolios."""

import logging

import numpy as np

from app.core.exceptions import EmptyInput, PanelTooShort
from app.core.parallel import parallel_map
from app.models.backtest import (
    BacktestConfig,
    BacktestReport,
    EstimatorResult,
    RankingRow,
    RebalanceRecord,
)
from app.models.covariance import EstimatorKind
from app.models.panel import ReturnsPanel
from app.services import portfolio
from app.services.market_data import iter_windows, slice_window
from app.services.pipeline import build_estimate

logger = logging.getLogger(__name__)


def run_backtest(panel: ReturnsPanel, cfg: BacktestConfig) -> BacktestReport:
    """Refit every rebalance_every days on the trailing train_len days.

    Weights chosen at a rebalance are held without drift adjustment until the
    next one; the realized return on day t is p^T x_t on raw returns.
    """
    needed = cfg.train_len + cfg.rebalance_every
    if panel.n_days < needed:
        raise PanelTooShort(
            f"panel has {panel.n_days} days, need train_len + rebalance_every = {needed}"
        )
    if cfg.train_len < panel.n_assets:
        logger.warning(
            "train_len=%d is below the %d assets (c=%.2f); MP estimators need c < 1",
            cfg.train_len,
            panel.n_assets,
            panel.n_assets / cfg.train_len,
        )
    windows = list(iter_windows(panel, cfg.train_len, cfg.rebalance_every))
    logger.info(
        "Backtest: %d assets, %d rebalances every %d days, estimators %s",
        panel.n_assets,
        len(windows),
        cfg.rebalance_every,
        ",".join(k.value for k in cfg.estimators),
    )

    def evaluate(kind: EstimatorKind) -> EstimatorResult:
        segments: list[np.ndarray] = []
        records: list[RebalanceRecord] = []
        for spec in windows:
            train, test = slice_window(panel, spec)
            fc = portfolio.forecast_returns(train, cfg.annual_return_target)
            estimate = build_estimate(
                kind,
                train,
                forecast=fc,
                grid=cfg.grid,
                shrinkage_method=cfg.shrinkage_method,
                rho_step=cfg.rho_step,
            )
            held = portfolio.min_variance(estimate, fc)
            segments.append(held.weights @ test.returns)
            records.append(
                RebalanceRecord(
                    date=test.dates[0],
                    weights=held.weights,
                    params=dict(estimate.meta),
                    warnings=list(held.warnings),
                )
            )
        realized = np.concatenate(segments)
        variance = float(np.var(realized))
        result = EstimatorResult(
            name=kind,
            rebalance_every=cfg.rebalance_every,
            realized=realized,
            annualized_risk_pct=portfolio.annualize_risk(variance),
            mean_daily_return=float(realized.mean()),
            rebalances=records,
        )
        logger.info(
            "%s (every %d days): annualized risk %.4f%%",
            kind.value,
            cfg.rebalance_every,
            result.annualized_risk_pct,
        )
        return result

    results = parallel_map(evaluate, cfg.estimators)
    return BacktestReport(config=cfg, assets=list(panel.assets), results=results)


def run_backtests(
    panel: ReturnsPanel, cfgs: list[BacktestConfig]
) -> list[BacktestReport]:
    """One backtest per configuration, typically one per rebalance frequency."""
    if not cfgs:
        raise EmptyInput("no backtest configurations given")
    return parallel_map(lambda cfg: run_backtest(panel, cfg), cfgs)


def compare_estimators(report: BacktestReport) -> list[RankingRow]:
    """Rows sorted by annualized risk, ties in estimator name order."""
    if not report.results:
        raise EmptyInput("report has no estimator results")
    rows = [
        RankingRow(
            name=r.name,
            rebalance_every=r.rebalance_every,
            annualized_risk_pct=r.annualized_risk_pct,
            mean_daily_return=r.mean_daily_return,
            warnings=r.warning_count,
        )
        for r in report.results
    ]
    return sorted(rows, key=lambda row: (row.annualized_risk_pct, row.name.value))
