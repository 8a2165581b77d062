"""Shared fixtures: seeded generators, small panels and the 750-day SPIKE panel."""

import logging
from collections.abc import Callable, Iterator
from datetime import date, timedelta
from pathlib import Path

import numpy as np
import pytest

from app.models.panel import ReturnsPanel
from app.services import market_data, synthetic

PanelFactory = Callable[..., ReturnsPanel]


def make_panel(
    returns: np.ndarray | list[list[float]], start: date = date(2020, 1, 1)
) -> ReturnsPanel:
    arr = np.asarray(returns, dtype=np.float64)
    m, n = arr.shape
    return ReturnsPanel(
        assets=[f"A{i}" for i in range(m)],
        dates=[start + timedelta(days=k) for k in range(n)],
        returns=arr,
    )


@pytest.fixture(autouse=True)
def _reset_app_logger() -> Iterator[None]:
    yield
    logger = logging.getLogger("app")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    logger.propagate = True
    logger.setLevel(logging.NOTSET)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(12345))


@pytest.fixture
def panel_factory() -> PanelFactory:
    return make_panel


@pytest.fixture
def small_panel(rng: np.random.Generator) -> ReturnsPanel:
    """5 assets x 60 days of daily-scale returns with a small drift."""
    return make_panel(0.01 * rng.standard_normal((5, 60)) + 0.001)


@pytest.fixture(scope="session")
def spike_panel() -> ReturnsPanel:
    """750-day SPIKE panel with 10 assets."""
    return synthetic.synthetic_fixture(m=10, n_days=750, seed=7)


@pytest.fixture
def returns_csv(tmp_path: Path, small_panel: ReturnsPanel) -> Path:
    path = tmp_path / "returns.csv"
    market_data.save_panel(small_panel, path)
    return path
