"""Synthetic population evaluation endpoint."""

from fastapi import APIRouter, Depends, HTTPException, status
from fastapi.concurrency import run_in_threadpool

from app.api.v1.endpoints.deps import get_analysis_service
from app.core.exceptions import NumericalError, ValidationError
from app.schemas.synthetic import SyntheticRequest, SyntheticResponse
from app.services.analysis import AnalysisService

router = APIRouter()


@router.post("/evaluations", response_model=SyntheticResponse)
async def evaluate_synthetic(
    request: SyntheticRequest,
    service: AnalysisService = Depends(get_analysis_service),
) -> SyntheticResponse:
    """Per-seed Frobenius errors of every estimator against the population matrix."""

    def work() -> SyntheticResponse:
        return SyntheticResponse(rows=service.seed_rows(service.synth_eval(request)))

    try:
        return await run_in_threadpool(work)
    except ValidationError as e:
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail=f"Invalid synthetic request: {str(e)}",
        )
    except NumericalError as e:
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Synthetic evaluation failed: {str(e)}",
        )
