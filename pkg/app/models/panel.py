"""Returns panel and window domain values."""

from datetime import date
from typing import Any

import numpy as np
from pydantic import field_validator, model_validator

from app.core.exceptions import (
    DimensionMismatch,
    DuplicateAsset,
    MissingCell,
    NonMonotonicDates,
    TooFewAssets,
    WindowOutOfBounds,
)
from app.models.base import DomainModel, frozen_array


class ReturnsPanel(DomainModel):
    """M assets x N days of simple daily returns, assets as rows."""

    assets: list[str]
    dates: list[date]
    returns: np.ndarray

    @field_validator("returns", mode="before")
    @classmethod
    def freeze_returns(cls, v: Any) -> np.ndarray:
        return frozen_array(v, ndim=2)

    @model_validator(mode="after")
    def check_invariants(self) -> "ReturnsPanel":
        m, n = self.returns.shape
        if len(self.assets) != m or len(self.dates) != n:
            raise DimensionMismatch(
                f"returns shape {self.returns.shape} does not match "
                f"{len(self.assets)} assets x {len(self.dates)} dates"
            )
        if m < 2:
            raise TooFewAssets(f"panel needs at least 2 assets, got {m}")
        if len(set(self.assets)) != m:
            raise DuplicateAsset("asset names must be unique")
        if n < 1:
            raise WindowOutOfBounds("panel has no trading days")
        if not np.isfinite(self.returns).all():
            i, t = np.argwhere(~np.isfinite(self.returns))[0]
            raise MissingCell(
                f"non-finite return for {self.assets[i]} on {self.dates[t]}",
                row=int(t),
                column=self.assets[i],
            )
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise NonMonotonicDates("dates must be strictly increasing")
        return self

    @property
    def n_assets(self) -> int:
        return self.returns.shape[0]

    @property
    def n_days(self) -> int:
        return self.returns.shape[1]

    @property
    def dimensionality(self) -> float:
        """Dimensionality constant c = M/N."""
        return self.n_assets / self.n_days

    def select_days(self, start: int, stop: int) -> "ReturnsPanel":
        """Sub-panel of columns [start, stop)."""
        return ReturnsPanel(
            assets=list(self.assets),
            dates=self.dates[start:stop],
            returns=self.returns[:, start:stop],
        )

    def with_returns(self, returns: np.ndarray) -> "ReturnsPanel":
        """Same labels, new values."""
        return ReturnsPanel(
            assets=list(self.assets), dates=list(self.dates), returns=returns
        )


class WindowSpec(DomainModel):
    """Training window followed by a test window, in day indices."""

    train_start: int
    train_len: int
    test_len: int

    @model_validator(mode="after")
    def check_lengths(self) -> "WindowSpec":
        if self.train_start < 0:
            raise WindowOutOfBounds("train_start must be >= 0")
        if self.train_len < 2:
            raise WindowOutOfBounds("train_len must be >= 2")
        if self.test_len < 1:
            raise WindowOutOfBounds("test_len must be >= 1")
        return self

    @property
    def test_start(self) -> int:
        return self.train_start + self.train_len

    @property
    def end(self) -> int:
        return self.test_start + self.test_len
