"""Shared endpoint dependencies."""

from app.services.analysis import AnalysisService


def get_analysis_service() -> AnalysisService:
    """Get analysis service instance."""
    return AnalysisService()
