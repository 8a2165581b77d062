"""Tests for returns ingestion, demeaning and windowing."""

from datetime import date
from pathlib import Path

import numpy as np
import pytest

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
from app.models.panel import ReturnsPanel, WindowSpec
from app.services import market_data


def write(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "returns.csv"
    path.write_text(text, encoding="utf-8")
    return path


def test_load_panel_parses_assets_as_rows(tmp_path: Path) -> None:
    path = write(
        tmp_path,
        "date,AAA,BBB\n"
        "2015-01-02,0.01,-0.02\n"
        "2015-01-05,0.005,0.0\n"
        "2015-01-06,-0.003,0.1\n",
    )
    panel = market_data.load_panel(path)
    assert panel.n_assets == 2
    assert panel.n_days == 3
    assert panel.assets == ["AAA", "BBB"]
    assert panel.dates[0] == date(2015, 1, 2)
    np.testing.assert_array_equal(panel.returns[0], [0.01, 0.005, -0.003])
    np.testing.assert_array_equal(panel.returns[1], [-0.02, 0.0, 0.1])


def test_blank_cell_reports_row_and_column(tmp_path: Path) -> None:
    path = write(tmp_path, "date,AAA,BBB\n2015-01-02,0.01,\n2015-01-05,0.005,0.0\n")
    with pytest.raises(MissingCell) as exc:
        market_data.load_panel(path)
    assert exc.value.row == 0
    assert exc.value.column == "BBB"


@pytest.mark.parametrize("cell", ["abc", "nan", "inf"])
def test_non_numeric_cells_are_missing(tmp_path: Path, cell: str) -> None:
    path = write(tmp_path, f"date,AAA,BBB\n2015-01-02,0.01,{cell}\n2015-01-05,0.005,0.0\n")
    with pytest.raises(MissingCell):
        market_data.load_panel(path)


def test_dates_must_increase(tmp_path: Path) -> None:
    path = write(tmp_path, "date,AAA,BBB\n2015-01-05,0.01,0.0\n2015-01-02,0.005,0.0\n")
    with pytest.raises(NonMonotonicDates):
        market_data.load_panel(path)


def test_duplicate_dates_rejected(tmp_path: Path) -> None:
    path = write(tmp_path, "date,AAA,BBB\n2015-01-02,0.01,0.0\n2015-01-02,0.005,0.0\n")
    with pytest.raises(NonMonotonicDates):
        market_data.load_panel(path)


def test_single_asset_rejected(tmp_path: Path) -> None:
    path = write(tmp_path, "date,AAA\n2015-01-02,0.01\n2015-01-05,0.005\n")
    with pytest.raises(TooFewAssets):
        market_data.load_panel(path)


def test_single_day_rejected(tmp_path: Path) -> None:
    path = write(tmp_path, "date,AAA,BBB\n2015-01-02,0.01,0.0\n")
    with pytest.raises(TooFewSamples):
        market_data.load_panel(path)


def test_empty_file_rejected(tmp_path: Path) -> None:
    with pytest.raises(EmptyInput):
        market_data.load_panel(write(tmp_path, ""))


def test_repeated_asset_header_rejected(tmp_path: Path) -> None:
    path = write(tmp_path, "date,A,A,B\n2015-01-02,0.1,0.2,0.3\n2015-01-05,0.0,0.1,0.2\n")
    with pytest.raises(DuplicateAsset, match="A"):
        market_data.load_panel(path)


def test_panel_rejects_repeated_asset_names() -> None:
    with pytest.raises(DuplicateAsset):
        ReturnsPanel(
            assets=["A", "A"],
            dates=[date(2015, 1, 2), date(2015, 1, 5)],
            returns=np.zeros((2, 2)),
        )


def test_non_utf8_file_rejected(tmp_path: Path) -> None:
    path = tmp_path / "returns.csv"
    path.write_bytes(b"date,A\xff,B\n2015-01-02,0.1,0.2\n2015-01-05,0.0,0.1\n")
    with pytest.raises(InvalidParams, match="UTF-8"):
        market_data.load_panel(path)


def test_save_load_round_trip_is_exact(tmp_path: Path, small_panel: ReturnsPanel) -> None:
    path = tmp_path / "panel.csv"
    market_data.save_panel(small_panel, path)
    assert market_data.load_panel(path) == small_panel


def test_demean_arithmetic(panel_factory) -> None:
    centered, means = market_data.demean(panel_factory([[1.0, 2.0, 3.0], [4.0, 4.0, 4.0]]))
    np.testing.assert_array_equal(centered.returns[0], [-1.0, 0.0, 1.0])
    np.testing.assert_array_equal(centered.returns[1], [0.0, 0.0, 0.0])
    np.testing.assert_array_equal(means, [2.0, 4.0])


def test_demean_zero_mean_rows_unchanged(panel_factory) -> None:
    panel = panel_factory([[-1.0, 0.0, 1.0], [2.0, -2.0, 0.0]])
    centered, means = market_data.demean(panel)
    np.testing.assert_array_equal(centered.returns, panel.returns)
    np.testing.assert_array_equal(means, [0.0, 0.0])


def test_demean_random_rows_have_zero_mean(rng, panel_factory) -> None:
    centered, _ = market_data.demean(panel_factory(rng.standard_normal((5, 20))))
    assert np.abs(centered.returns.mean(axis=1)).max() < 1e-14


def test_slice_window_first_backtest_window(rng, panel_factory) -> None:
    panel = panel_factory(rng.standard_normal((3, 750)))
    train, test = market_data.slice_window(
        panel, WindowSpec(train_start=0, train_len=200, test_len=30)
    )
    assert train.dates == panel.dates[0:200]
    assert test.dates == panel.dates[200:230]
    np.testing.assert_array_equal(test.returns, panel.returns[:, 200:230])


def test_slice_window_past_end(rng, panel_factory) -> None:
    panel = panel_factory(rng.standard_normal((3, 50)))
    with pytest.raises(WindowOutOfBounds):
        market_data.slice_window(panel, WindowSpec(train_start=0, train_len=50, test_len=1))


def test_window_spec_rejects_short_training() -> None:
    with pytest.raises(WindowOutOfBounds):
        WindowSpec(train_start=0, train_len=1, test_len=1)


def test_iter_windows_tiles_test_segments(rng, panel_factory) -> None:
    panel = panel_factory(rng.standard_normal((3, 750)))
    windows = list(market_data.iter_windows(panel, train_len=200, step=30))
    assert len(windows) == 18
    assert windows[0].test_start == 200
    assert windows[-1].end == 740
    assert all(b.test_start == a.end for a, b in zip(windows, windows[1:]))


def test_panel_rejects_non_finite_returns(panel_factory) -> None:
    with pytest.raises(MissingCell):
        panel_factory([[0.1, np.nan], [0.2, 0.3]])


def test_panel_dimensionality(panel_factory) -> None:
    panel: ReturnsPanel = panel_factory(np.zeros((4, 8)))
    assert panel.dimensionality == 0.5
