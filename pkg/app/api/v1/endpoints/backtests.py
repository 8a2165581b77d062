"""Rolling-window backtest endpoint."""

from fastapi import APIRouter, Depends, HTTPException, status
from fastapi.concurrency import run_in_threadpool

from app.api.v1.endpoints.deps import get_analysis_service
from app.core.exceptions import NumericalError, ValidationError
from app.schemas.backtest import BacktestRequest, BacktestResponse
from app.services.analysis import AnalysisService

router = APIRouter()


@router.post("", response_model=BacktestResponse)
async def run_backtest(
    request: BacktestRequest,
    service: AnalysisService = Depends(get_analysis_service),
) -> BacktestResponse:
    """
    Out-of-sample risk of every estimator, one run per rebalance frequency.

    The document has the same layout as the command line JSON report, plus
    a ranking by annualized risk.
    """

    def work() -> BacktestResponse:
        reports = service.backtest(
            request.panel.to_panel(),
            train_len=request.train_len,
            rebalance_every=request.rebalance_every,
            annual_return=request.annual_return,
            kinds=request.estimators,
            grid_step=request.grid_step,
            validation_fraction=request.validation_fraction,
            shrinkage_method=request.shrinkage_method,
            rho_step=request.rho_step,
        )
        return service.backtest_response(reports)

    try:
        return await run_in_threadpool(work)
    except ValidationError as e:
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail=f"Invalid backtest request: {str(e)}",
        )
    except NumericalError as e:
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Backtest failed: {str(e)}",
        )
