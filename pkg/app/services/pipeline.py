"""Build any estimator kind from a raw training window."""

import logging

from app.core.config import settings
from app.core.exceptions import InvalidParams
from app.models.backtest import ShrinkageMethod
from app.models.covariance import CombinationWeights, CovarianceEstimate, EstimatorKind
from app.models.panel import ReturnsPanel
from app.models.portfolio import ReturnForecast
from app.models.tuning import GridSpec
from app.services import estimators, portfolio, tuning
from app.services.market_data import demean

logger = logging.getLogger(__name__)


def build_estimate(
    kind: EstimatorKind,
    train_raw: ReturnsPanel,
    *,
    forecast: ReturnForecast | None = None,
    weights: CombinationWeights | None = None,
    rho: float | None = None,
    grid: GridSpec | None = None,
    shrinkage_method: ShrinkageMethod = ShrinkageMethod.VALIDATION,
    rho_step: float | None = None,
) -> CovarianceEstimate:
    """Demean the window, form the SCM and derive the requested estimator.

    SHRINK picks rho and COMBINED picks (theta, phi) on the window itself
    unless fixed values are passed. The combined matrix is always rebuilt on
    the full window with the selected weights.
    """
    grid = grid or GridSpec(
        step=settings.GRID_STEP, validation_fraction=settings.VALIDATION_FRACTION
    )
    rho_step = settings.RHO_STEP if rho_step is None else rho_step
    if forecast is None:
        forecast = portfolio.forecast_returns(train_raw, settings.ANNUAL_RETURN_TARGET)

    train, _ = demean(train_raw)
    scm = estimators.sample_covariance(train)

    match kind:
        case EstimatorKind.SCM:
            return scm
        case EstimatorKind.IDENTITY_TARGET:
            return estimators.identity_target(scm)
        case EstimatorKind.F_TARGET:
            return estimators.shrinkage_target_F(scm)
        case EstimatorKind.SHRINK:
            target = estimators.shrinkage_target_F(scm)
            if rho is None:
                rho = estimators.shrinkage_intensity(
                    train,
                    scm,
                    target,
                    method=shrinkage_method,
                    forecast=forecast,
                    rho_step=rho_step,
                    validation_fraction=grid.validation_fraction,
                )
                logger.info("Selected shrinkage intensity rho=%.3f", rho)
            return estimators.linear_shrinkage(scm, target, rho)
        case EstimatorKind.MP:
            return estimators.mp_clean(scm, train.dimensionality)
        case EstimatorKind.COMBINED:
            if weights is None:
                weights = tuning.tune_weights(train_raw, forecast, grid)
            f = estimators.shrinkage_target_F(scm)
            mp = estimators.mp_clean(scm, train.dimensionality)
            return estimators.combine(f, mp, scm, weights)
    raise InvalidParams(f"{kind.value} cannot be estimated from returns")
