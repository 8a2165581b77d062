"""Workflow service shared by the command line and the HTTP API."""

import logging
from typing import Any

import numpy as np

from app.core.config import Settings, get_settings
from app.core.exceptions import InvalidParams
from app.core.parallel import parallel_map
from app.models.backtest import BacktestConfig, BacktestReport, ShrinkageMethod
from app.models.covariance import (
    CombinationWeights,
    CovarianceEstimate,
    EstimatorKind,
    MpParams,
)
from app.models.panel import ReturnsPanel
from app.models.portfolio import Portfolio, ReturnForecast
from app.models.synthetic import SeedEvaluation, SpikeSpec
from app.models.tuning import GridPoint, GridSpec
from app.schemas.backtest import BacktestResponse
from app.schemas.estimate import EstimateResponse, PortfolioResponse
from app.schemas.rmt import DensityPoint, MpDensityResponse
from app.schemas.synthetic import PopulationModel, SeedRow, SyntheticRequest
from app.schemas.tuning import GridPointSchema, TuningResponse
from app.services import (
    backtest,
    estimators,
    portfolio,
    rmt,
    spectral,
    synthetic,
    tuning,
)
from app.services.market_data import demean
from app.services.pipeline import build_estimate

logger = logging.getLogger(__name__)


class AnalysisService:
    """Runs the estimator, portfolio, tuning, backtest and synthetic workflows.

    Arguments left as None fall back to the configured defaults, which are
    also echoed into every report.
    """

    def __init__(self, settings: Settings | None = None) -> None:
        self.settings = settings or get_settings()

    def provenance(self) -> dict[str, Any]:
        return self.settings.provenance()

    def grid(
        self, step: float | None = None, validation_fraction: float | None = None
    ) -> GridSpec:
        return GridSpec(
            step=self.settings.GRID_STEP if step is None else step,
            validation_fraction=(
                self.settings.VALIDATION_FRACTION
                if validation_fraction is None
                else validation_fraction
            ),
        )

    def forecast(
        self, panel: ReturnsPanel, annual_return: float | None = None
    ) -> ReturnForecast:
        return portfolio.forecast_returns(panel, self._annual_target(annual_return))

    def _annual_target(self, annual_return: float | None) -> float:
        if annual_return is None:
            return self.settings.ANNUAL_RETURN_TARGET
        return annual_return

    # Estimates

    def estimate(
        self,
        panel: ReturnsPanel,
        estimator: EstimatorKind | str,
        *,
        theta: float | None = None,
        phi: float | None = None,
        rho: float | None = None,
        shrinkage_method: ShrinkageMethod | str = ShrinkageMethod.VALIDATION,
        grid_step: float | None = None,
        validation_fraction: float | None = None,
        annual_return: float | None = None,
    ) -> CovarianceEstimate:
        """Covariance estimate of the requested kind on the whole panel."""
        kind = EstimatorKind(estimator)
        if (theta is None) != (phi is None):
            raise InvalidParams("theta and phi must be given together")
        weights = None if theta is None else CombinationWeights(theta=theta, phi=phi)
        return build_estimate(
            kind,
            panel,
            forecast=self.forecast(panel, annual_return),
            weights=weights,
            rho=rho,
            grid=self.grid(grid_step, validation_fraction),
            shrinkage_method=ShrinkageMethod(shrinkage_method),
            rho_step=self.settings.RHO_STEP,
        )

    def min_variance(
        self,
        panel: ReturnsPanel,
        estimate: CovarianceEstimate,
        annual_return: float | None = None,
        relax_infeasible: bool = True,
    ) -> tuple[Portfolio, ReturnForecast]:
        fc = self.forecast(panel, annual_return)
        held = portfolio.min_variance(estimate, fc, relax_infeasible=relax_infeasible)
        return held, fc

    # Tuning

    def tune(
        self,
        panel: ReturnsPanel,
        grid_step: float | None = None,
        validation_fraction: float | None = None,
        annual_return: float | None = None,
    ) -> tuple[CombinationWeights, list[GridPoint]]:
        fc = self.forecast(panel, annual_return)
        grid = self.grid(grid_step, validation_fraction)
        points = tuning.evaluate_grid(panel, fc, grid)
        weights = tuning.select_weights(points)
        logger.info("Selected theta=%.3f phi=%.3f", weights.theta, weights.phi)
        return weights, points

    # Backtest

    def backtest(
        self,
        panel: ReturnsPanel,
        *,
        train_len: int | None = None,
        rebalance_every: list[int] | None = None,
        annual_return: float | None = None,
        kinds: list[EstimatorKind] | None = None,
        grid_step: float | None = None,
        validation_fraction: float | None = None,
        shrinkage_method: ShrinkageMethod | str = ShrinkageMethod.VALIDATION,
        rho_step: float | None = None,
    ) -> list[BacktestReport]:
        frequencies = rebalance_every or list(self.settings.REBALANCE_EVERY)
        options: dict[str, Any] = {
            "train_len": self.settings.TRAIN_LEN if train_len is None else train_len,
            "annual_return_target": self._annual_target(annual_return),
            "grid": self.grid(grid_step, validation_fraction),
            "shrinkage_method": ShrinkageMethod(shrinkage_method),
            "rho_step": self.settings.RHO_STEP if rho_step is None else rho_step,
        }
        if kinds:
            options["estimators"] = [EstimatorKind(k) for k in kinds]
        configs = [
            BacktestConfig(rebalance_every=every, **options) for every in frequencies
        ]
        return backtest.run_backtests(panel, configs)

    def backtest_response(self, reports: list[BacktestReport]) -> BacktestResponse:
        document = BacktestResponse.from_reports(reports, self.provenance())
        rows = [r for report in reports for r in backtest.compare_estimators(report)]
        ranking = BacktestResponse.ranking_entries(rows)
        return document.model_copy(update={"ranking": ranking})

    # Marchenko-Pastur

    def mp_density(
        self,
        c: float,
        sigma2: float = 1.0,
        points: int = 200,
        panel: ReturnsPanel | None = None,
        train_len: int | None = None,
    ) -> MpDensityResponse:
        """Density on an even grid over the support, optionally against a panel.

        With a panel, c comes from its first training window and the
        correlation spectrum of that window is overlaid.
        """
        if points < 2:
            raise InvalidParams(f"points must be >= 2, got {points}")
        eigenvalues = None
        if panel is not None:
            window = self.settings.TRAIN_LEN if train_len is None else train_len
            window = min(window, panel.n_days)
            train, _ = demean(panel.select_days(0, window))
            corr, _ = estimators.correlation_from_covariance(
                estimators.sample_covariance(train).matrix
            )
            eigenvalues = spectral.eigvals_descending(corr)
            c, sigma2 = train.dimensionality, 1.0

        params = MpParams(c=c, sigma2=sigma2)
        bounds = rmt.mp_bounds(params)
        xs = np.linspace(bounds.lower, bounds.upper, points)
        xs[0], xs[-1] = bounds.lower, bounds.upper
        density = np.asarray(rmt.mp_density(xs, params))

        empirical = None
        ks = None
        split = None
        if eigenvalues is not None:
            centers, hist = rmt.empirical_spectral_density(
                eigenvalues, bins=points - 1, support=(bounds.lower, bounds.upper)
            )
            # histogram integrates to one over the support; rescale to the bulk share
            share = float(bounds.contains(eigenvalues).mean())
            empirical = (
                np.interp(xs, centers, hist * share) if share > 0 else np.zeros_like(xs)
            )
            ks = rmt.ks_distance(eigenvalues, params)
            split = rmt.split_spectrum(eigenvalues, bounds)
            logger.info(
                "KS distance to MP law %.4f (c=%.3f), spectrum %s", ks, c, split
            )

        return MpDensityResponse(
            c=c,
            sigma2=sigma2,
            lower=bounds.lower,
            upper=bounds.upper,
            points=[
                DensityPoint(
                    x=float(x),
                    density=float(d),
                    empirical_density=(
                        None if empirical is None else float(empirical[i])
                    ),
                )
                for i, (x, d) in enumerate(zip(xs, density))
            ],
            ks_distance=ks,
            spectrum_split=split,
        )

    # Synthetic

    def spike_spec(self, request: SyntheticRequest) -> SpikeSpec:
        spiked = request.model == PopulationModel.SPIKE
        eigenvalues = list(request.spikes) if spiked else []
        return synthetic.spike_spec(
            request.m,
            eigenvalues,
            distribution=request.distribution,
            nu=request.nu,
            temporal_ar1=request.ar1,
            direction_seed=request.direction_seed,
        )

    def synth_eval(self, request: SyntheticRequest) -> list[SeedEvaluation]:
        spec = self.spike_spec(request)
        first = request.first_seed
        if first is None:
            first = self.settings.DEFAULT_SEED
        seeds = [first + k for k in range(request.seeds)]
        logger.info(
            "Synthetic evaluation: %s model, M=%d, N=%d, %d seeds",
            request.model,
            request.m,
            request.n,
            len(seeds),
        )
        return parallel_map(
            lambda seed: synthetic.evaluate_seed(spec, request.n, seed), seeds
        )

    # Response builders

    @staticmethod
    def estimate_response(
        panel: ReturnsPanel, est: CovarianceEstimate
    ) -> EstimateResponse:
        return EstimateResponse(
            estimator=est.kind,
            assets=list(panel.assets),
            matrix=est.matrix.tolist(),
            params=dict(est.meta),
        )

    @staticmethod
    def portfolio_response(
        panel: ReturnsPanel,
        est: CovarianceEstimate,
        held: Portfolio,
        fc: ReturnForecast,
    ) -> PortfolioResponse:
        variance = portfolio.portfolio_variance(held, est)
        return PortfolioResponse(
            estimator=est.kind,
            assets=list(panel.assets),
            weights=held.weights.tolist(),
            daily_variance=variance,
            annualized_risk_pct=portfolio.annualize_risk(max(variance, 0.0)),
            daily_return_target=fc.r_daily,
            params=dict(est.meta),
            warnings=list(held.warnings),
            iterations=held.iterations,
        )

    def tuning_response(
        self, weights: CombinationWeights, points: list[GridPoint]
    ) -> TuningResponse:
        return TuningResponse(
            theta=weights.theta,
            phi=weights.phi,
            surface=[
                GridPointSchema(theta=p.theta, phi=p.phi, variance=p.variance)
                for p in points
            ],
            config=self.provenance(),
        )

    @staticmethod
    def seed_rows(evaluations: list[SeedEvaluation]) -> list[SeedRow]:
        return [
            SeedRow(
                seed=e.seed, errors=dict(e.errors), theta=e.theta, phi=e.phi, rho=e.rho
            )
            for e in evaluations
        ]
