"""Marchenko-Pastur density endpoint."""

from fastapi import APIRouter, Depends, HTTPException, Query, status
from fastapi.concurrency import run_in_threadpool

from app.api.v1.endpoints.deps import get_analysis_service
from app.core.exceptions import ValidationError
from app.schemas.rmt import MpDensityResponse
from app.services.analysis import AnalysisService

router = APIRouter()


@router.get("/mp-density", response_model=MpDensityResponse)
async def get_mp_density(
    c: float = Query(..., description="Dimensionality M/N, strictly between 0 and 1"),
    sigma2: float = Query(1.0, description="Variance of the entries"),
    points: int = Query(200, ge=2, le=100_000, description="Grid points"),
    service: AnalysisService = Depends(get_analysis_service),
) -> MpDensityResponse:
    """Density curve over the support [lower, upper], zero at both ends."""
    try:
        return await run_in_threadpool(service.mp_density, c, sigma2, points)
    except ValidationError as e:
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail=f"Invalid MP parameters: {str(e)}",
        )
