"""Tests for (theta, phi) grid tuning and the oracle projection."""

import numpy as np
import pytest

from app.core.exceptions import InvalidParams, WindowTooSmall
from app.models.covariance import CombinationWeights, CovarianceEstimate, EstimatorKind
from app.models.portfolio import ReturnForecast
from app.models.tuning import GridPoint, GridSpec
from app.services import estimators, synthetic, tuning
from app.services.market_data import demean
from tests.conftest import make_panel


@pytest.fixture
def hull(rng, panel_factory):
    """SCM, F and MP from one 6 x 30 panel: three distinct matrices."""
    train, _ = demean(panel_factory(rng.standard_normal((6, 30))))
    s = estimators.sample_covariance(train)
    return s, estimators.shrinkage_target_F(s), estimators.mp_clean(s, train.dimensionality)


def population(matrix: np.ndarray) -> CovarianceEstimate:
    return CovarianceEstimate(matrix=matrix, kind=EstimatorKind.POPULATION)


def test_grid_step_half_has_nine_points(rng, panel_factory) -> None:
    panel = panel_factory(0.01 * rng.standard_normal((4, 40)) + 0.001)
    points = tuning.evaluate_grid(panel, ReturnForecast.unconstrained(4), GridSpec(step=0.5))
    assert len(points) == 9
    assert {(p.theta, p.phi) for p in points} == {
        (t, f) for t in (0.0, 0.5, 1.0) for f in (0.0, 0.5, 1.0)
    }
    # ordered by phi, then theta
    assert [(p.phi, p.theta) for p in points] == sorted((p.phi, p.theta) for p in points)


def test_phi_zero_row_shares_one_variance(rng, panel_factory) -> None:
    panel = panel_factory(0.01 * rng.standard_normal((4, 40)))
    points = tuning.evaluate_grid(panel, ReturnForecast.unconstrained(4), GridSpec(step=0.25))
    assert len({p.variance for p in points if p.phi == 0.0}) == 1


def test_tune_weights_deterministic_grid_member(rng, panel_factory) -> None:
    panel = panel_factory(0.01 * rng.standard_normal((5, 60)) + 0.0005)
    fc = ReturnForecast.unconstrained(5)
    grid = GridSpec(step=0.25)
    first = tuning.tune_weights(panel, fc, grid)
    second = tuning.tune_weights(panel, fc, grid)
    assert first == second
    assert first.theta in grid.values()
    assert first.phi in grid.values()


def test_select_weights_tie_breaks_toward_small_phi_then_theta() -> None:
    points = [
        GridPoint(theta=0.5, phi=0.5, variance=1.0),
        GridPoint(theta=1.0, phi=0.0, variance=1.0),
        GridPoint(theta=0.0, phi=0.0, variance=1.0),
        GridPoint(theta=0.0, phi=1.0, variance=2.0),
    ]
    assert tuning.select_weights(points) == CombinationWeights(theta=0.0, phi=0.0)


def test_window_too_small_for_split(panel_factory) -> None:
    panel = panel_factory(np.arange(6.0).reshape(2, 3))
    with pytest.raises(WindowTooSmall):
        tuning.evaluate_grid(panel, ReturnForecast.unconstrained(2), GridSpec(step=0.5))


def test_window_too_small_for_clipping(rng, panel_factory) -> None:
    panel = panel_factory(rng.standard_normal((10, 12)))
    with pytest.raises(WindowTooSmall):
        tuning.evaluate_grid(panel, ReturnForecast.unconstrained(10), GridSpec(step=0.5))


@pytest.mark.parametrize("step", [0.0, 0.3, 0.6])
def test_grid_spec_rejects_bad_steps(step: float) -> None:
    with pytest.raises(InvalidParams):
        GridSpec(step=step)


def test_grid_values_exact_endpoints() -> None:
    values = GridSpec(step=0.02).values()
    assert len(values) == 51
    assert values[0] == 0.0
    assert values[-1] == 1.0


def test_simplex_map_round_trip() -> None:
    w = CombinationWeights(theta=0.3, phi=0.8)
    back = tuning.from_simplex(*tuning.simplex_weights(w))
    assert back.theta == pytest.approx(0.3, abs=1e-15)
    assert back.phi == pytest.approx(0.8, abs=1e-15)
    assert tuning.from_simplex(0.0, 0.0, 1.0) == CombinationWeights(theta=0.0, phi=0.0)


def test_oracle_scm_vertex(hull) -> None:
    s, f, mp = hull
    weights, err = tuning.oracle_weights(population(s.matrix), f, mp, s)
    assert weights.phi == pytest.approx(0.0, abs=1e-12)
    assert weights.theta == 0.0
    assert err == pytest.approx(0.0, abs=1e-12)


def test_oracle_f_vertex(hull) -> None:
    s, f, mp = hull
    weights, err = tuning.oracle_weights(population(f.matrix), f, mp, s)
    assert weights.theta == pytest.approx(1.0, abs=1e-8)
    assert weights.phi == pytest.approx(1.0, abs=1e-8)
    assert err == pytest.approx(0.0, abs=1e-12)


def test_oracle_recovers_known_mixture(hull) -> None:
    s, f, mp = hull
    pop = population(0.5 * f.matrix + 0.5 * mp.matrix)
    weights, err = tuning.oracle_weights(pop, f, mp, s)
    assert weights.theta == pytest.approx(0.5, abs=1e-8)
    assert weights.phi == pytest.approx(1.0, abs=1e-8)
    assert err == pytest.approx(0.0, abs=1e-8)


def test_oracle_beats_dense_simplex_grid(hull, rng) -> None:
    s, f, mp = hull
    b = rng.standard_normal((6, 6))
    pop = population(b @ b.T / 6)
    weights, err = tuning.oracle_weights(pop, f, mp, s)
    n = 200
    best = np.inf
    for i in range(n + 1):
        for j in range(n + 1 - i):
            a, c = i / n, j / n
            mix = a * f.matrix + c * mp.matrix + (1 - a - c) * s.matrix
            best = min(best, float(np.linalg.norm(pop.matrix - mix, "fro")))
    assert err <= best + 1e-12
    vertices = [np.linalg.norm(pop.matrix - m.matrix, "fro") for m in (s, f, mp)]
    assert err <= min(vertices) + 1e-9


@pytest.mark.slow
def test_oracle_dominance_on_spike_data() -> None:
    spec = synthetic.spike_spec(100, [10.0])
    for seed in range(20):
        ev = synthetic.evaluate_seed(spec, 200, seed)
        best_vertex = min(ev.errors[k] for k in ("f", "mp", "scm"))
        assert ev.errors["combined"] <= best_vertex + 1e-9


@pytest.mark.slow
def test_tuning_moves_off_scm_when_population_is_structured() -> None:
    m, n = 10, 80
    pop = 0.5 * np.eye(m) + 0.5 * np.ones((m, m))
    root = np.linalg.cholesky(pop)
    picks = []
    for seed in range(20):
        gen = np.random.Generator(np.random.PCG64(seed))
        panel = make_panel(0.01 * root @ gen.standard_normal((m, n)))
        w = tuning.tune_weights(panel, ReturnForecast.unconstrained(m), GridSpec(step=0.25))
        picks.append(w.phi > 0)
    assert sum(picks) > 10
