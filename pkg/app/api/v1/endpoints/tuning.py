"""Combination weight tuning endpoint."""

from fastapi import APIRouter, Depends, HTTPException, status
from fastapi.concurrency import run_in_threadpool

from app.api.v1.endpoints.deps import get_analysis_service
from app.core.exceptions import NumericalError, ValidationError
from app.schemas.tuning import TuningRequest, TuningResponse
from app.services.analysis import AnalysisService

router = APIRouter()


@router.post("", response_model=TuningResponse)
async def tune_weights(
    request: TuningRequest,
    service: AnalysisService = Depends(get_analysis_service),
) -> TuningResponse:
    """
    Grid search of (theta, phi) on a chronological fit/validation split.

    Returns the selected weights and the validation variance at every grid point.
    """

    def work() -> TuningResponse:
        weights, points = service.tune(
            request.panel.to_panel(),
            request.grid_step,
            request.validation_fraction,
            request.annual_return,
        )
        return service.tuning_response(weights, points)

    try:
        return await run_in_threadpool(work)
    except ValidationError as e:
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail=f"Invalid tuning request: {str(e)}",
        )
    except NumericalError as e:
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Failed to tune weights: {str(e)}",
        )
