"""Returns panel payload shared by the analysis requests."""

from datetime import date

import numpy as np
from pydantic import Field

from app.core.exceptions import DimensionMismatch
from app.models.panel import ReturnsPanel
from app.schemas.base import BaseSchema


class PanelPayload(BaseSchema):
    """Returns laid out like the CSV input: one row per date, one column per asset."""

    assets: list[str] = Field(..., description="Asset identifiers")
    dates: list[date] = Field(..., description="Trading days, strictly increasing")
    returns: list[list[float]] = Field(
        ..., description="Simple daily returns, rows aligned with dates"
    )

    def to_panel(self) -> ReturnsPanel:
        try:
            rows = np.asarray(self.returns, dtype=np.float64)
        except ValueError:
            rows = np.empty(0)
        if rows.ndim != 2:
            raise DimensionMismatch("returns must be a rectangular list of rows")
        return ReturnsPanel(assets=self.assets, dates=self.dates, returns=rows.T)

    @classmethod
    def from_panel(cls, panel: ReturnsPanel) -> "PanelPayload":
        return cls(
            assets=list(panel.assets),
            dates=list(panel.dates),
            returns=panel.returns.T.tolist(),
        )
