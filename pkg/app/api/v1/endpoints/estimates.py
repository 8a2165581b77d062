"""Covariance estimate and minimum-variance portfolio endpoints."""

from fastapi import APIRouter, Depends, HTTPException, status
from fastapi.concurrency import run_in_threadpool

from app.api.v1.endpoints.deps import get_analysis_service
from app.core.exceptions import NumericalError, ValidationError
from app.schemas.estimate import (
    EstimateRequest,
    EstimateResponse,
    PortfolioRequest,
    PortfolioResponse,
)
from app.services.analysis import AnalysisService

router = APIRouter()


@router.post("/estimates", response_model=EstimateResponse)
async def create_estimate(
    request: EstimateRequest,
    service: AnalysisService = Depends(get_analysis_service),
) -> EstimateResponse:
    """
    Build a covariance estimate from a returns panel.

    COMBINED tunes (theta, phi) on the panel unless both are given;
    SHRINK selects rho unless it is given.
    """

    def work() -> EstimateResponse:
        panel = request.panel.to_panel()
        est = service.estimate(
            panel,
            request.estimator,
            theta=request.theta,
            phi=request.phi,
            rho=request.rho,
            shrinkage_method=request.shrinkage_method,
            grid_step=request.grid_step,
            validation_fraction=request.validation_fraction,
            annual_return=request.annual_return,
        )
        return service.estimate_response(panel, est)

    try:
        return await run_in_threadpool(work)
    except ValidationError as e:
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail=f"Invalid estimate request: {str(e)}",
        )
    except NumericalError as e:
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Failed to build estimate: {str(e)}",
        )


@router.post("/portfolios", response_model=PortfolioResponse)
async def create_portfolio(
    request: PortfolioRequest,
    service: AnalysisService = Depends(get_analysis_service),
) -> PortfolioResponse:
    """Long-only minimum-variance weights under the annual return target."""

    def work() -> PortfolioResponse:
        panel = request.panel.to_panel()
        est = service.estimate(
            panel,
            request.estimator,
            theta=request.theta,
            phi=request.phi,
            rho=request.rho,
            shrinkage_method=request.shrinkage_method,
            grid_step=request.grid_step,
            validation_fraction=request.validation_fraction,
            annual_return=request.annual_return,
        )
        held, fc = service.min_variance(
            panel, est, request.annual_return, request.relax_infeasible
        )
        return service.portfolio_response(panel, est, held, fc)

    try:
        return await run_in_threadpool(work)
    except ValidationError as e:
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail=f"Invalid portfolio request: {str(e)}",
        )
    except NumericalError as e:
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Failed to solve portfolio: {str(e)}",
        )
