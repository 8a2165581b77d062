"""API v1 router configuration."""

from fastapi import APIRouter

from app.api.v1.endpoints import backtests, estimates, rmt, synthetic, tuning

api_router = APIRouter()

api_router.include_router(
    estimates.router,
    tags=["Estimates"],
)

api_router.include_router(
    tuning.router,
    prefix="/tuning",
    tags=["Tuning"],
)

api_router.include_router(
    backtests.router,
    prefix="/backtests",
    tags=["Backtests"],
)

api_router.include_router(
    rmt.router,
    prefix="/rmt",
    tags=["RMT"],
)

api_router.include_router(
    synthetic.router,
    prefix="/synthetic",
    tags=["Synthetic"],
)
