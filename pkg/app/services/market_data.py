"""Returns panel ingestion, demeaning and windowing."""

import logging
from collections.abc import Iterator
from pathlib import Path

import numpy as np
import pandas as pd

from app.core.exceptions import (
    DuplicateAsset,
    EmptyInput,
    InvalidParams,
    MissingCell,
    NonMonotonicDates,
    TooFewAssets,
    TooFewSamples,
    WindowOutOfBounds,
)
from app.core.io import atomic_write_text, frame_to_csv
from app.models.panel import ReturnsPanel, WindowSpec

logger = logging.getLogger(__name__)

DATE_FORMAT = "%Y-%m-%d"


def load_panel(path: str | Path) -> ReturnsPanel:
    """Read a `date,ASSET1,...,ASSETM` CSV into an assets-as-rows panel."""
    try:
        # header=None keeps repeated asset names as they are written
        raw = pd.read_csv(
            path,
            header=None,
            dtype=str,
            keep_default_na=False,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError:
        raise EmptyInput(f"{path} is empty") from None
    except pd.errors.ParserError as exc:
        raise InvalidParams(f"malformed returns file {path}: {exc}") from None
    except UnicodeDecodeError:
        raise InvalidParams(f"{path} is not valid UTF-8 text") from None
    frame = raw.iloc[1:].reset_index(drop=True)
    frame.columns = [str(c) for c in raw.iloc[0]]
    return panel_from_frame(frame)


def panel_from_frame(raw: pd.DataFrame) -> ReturnsPanel:
    """Validate a string frame laid out as the returns CSV."""
    if raw.shape[1] < 1:
        raise TooFewAssets("returns file has no columns")
    date_col, asset_cols = raw.columns[0], list(raw.columns[1:])
    if len(asset_cols) < 2:
        raise TooFewAssets(f"need at least 2 assets, got {len(asset_cols)}")
    names = [str(c) for c in raw.columns]
    repeated = sorted({c for c in names if names.count(c) > 1})
    if repeated:
        raise DuplicateAsset(f"duplicate columns: {', '.join(repeated)}")
    if len(raw) < 2:
        raise TooFewSamples(f"need at least 2 trading days, got {len(raw)}")

    dates = pd.to_datetime(raw[date_col].str.strip(), format=DATE_FORMAT, errors="coerce")
    if dates.isna().any():
        row = int(np.flatnonzero(dates.isna().to_numpy())[0])
        raise MissingCell(f"invalid date on data row {row + 1}", row=row, column=date_col)
    if not (dates.diff().dropna() > pd.Timedelta(0)).all():
        raise NonMonotonicDates("dates must be strictly increasing")

    values = np.empty((len(raw), len(asset_cols)), dtype=np.float64)
    for j, col in enumerate(asset_cols):
        for i, cell in enumerate(raw[col].tolist()):
            values[i, j] = _parse_cell(cell, row=i, column=col)

    logger.debug("Loaded panel with %d assets x %d days", len(asset_cols), len(raw))
    return ReturnsPanel(
        assets=[str(c) for c in asset_cols],
        dates=[d.date() for d in dates],
        returns=values.T,
    )


def _parse_cell(cell: object, row: int, column: str) -> float:
    # short rows come back as NaN floats, not strings
    text = cell.strip() if isinstance(cell, str) else ""
    try:
        value = float(text)
    except ValueError:
        raise MissingCell(
            f"missing or non-numeric cell at data row {row + 1}, column {column!r}",
            row=row,
            column=column,
        ) from None
    if not np.isfinite(value):
        raise MissingCell(
            f"non-finite cell at data row {row + 1}, column {column!r}",
            row=row,
            column=column,
        )
    return value


def panel_to_frame(panel: ReturnsPanel) -> pd.DataFrame:
    """Dates as rows, assets as columns."""
    frame = pd.DataFrame(panel.returns.T, columns=panel.assets)
    frame.insert(0, "date", [d.strftime(DATE_FORMAT) for d in panel.dates])
    return frame


def save_panel(panel: ReturnsPanel, path: str | Path) -> None:
    """Write the panel in the CSV layout read by load_panel."""
    atomic_write_text(path, frame_to_csv(panel_to_frame(panel)))


def demean(panel: ReturnsPanel) -> tuple[ReturnsPanel, np.ndarray]:
    """Subtract each asset's mean over the panel's full extent."""
    means = panel.returns.mean(axis=1)
    centered = panel.returns - means[:, None]
    # second pass removes the rounding residue of the first
    centered -= centered.mean(axis=1)[:, None]
    return panel.with_returns(centered), means


def slice_window(
    panel: ReturnsPanel, spec: WindowSpec
) -> tuple[ReturnsPanel, ReturnsPanel]:
    """Split out a training window and the test window right after it."""
    if spec.end > panel.n_days:
        raise WindowOutOfBounds(
            f"window [{spec.train_start}, {spec.end}) exceeds panel of {panel.n_days} days"
        )
    train = panel.select_days(spec.train_start, spec.test_start)
    test = panel.select_days(spec.test_start, spec.end)
    return train, test


def iter_windows(
    panel: ReturnsPanel, train_len: int, step: int, test_len: int | None = None
) -> Iterator[WindowSpec]:
    """Consecutive windows advanced by step; test segments tile without overlap."""
    test_len = step if test_len is None else test_len
    start = 0
    while start + train_len + test_len <= panel.n_days:
        yield WindowSpec(train_start=start, train_len=train_len, test_len=test_len)
        start += step
