"""Tests for the covariance estimators."""

import logging

import numpy as np
import pytest

from app.core.exceptions import DimensionMismatch, NotDemeaned, RhoOutOfRange, ZeroVariance
from app.models.backtest import ShrinkageMethod
from app.models.covariance import (
    CombinationWeights,
    CovarianceEstimate,
    EstimatorKind,
    MpParams,
)
from app.services import estimators, rmt, synthetic
from app.services.market_data import demean
from tests.conftest import make_panel


def scm(matrix) -> CovarianceEstimate:
    return CovarianceEstimate(matrix=np.asarray(matrix, dtype=float), kind=EstimatorKind.SCM)


@pytest.fixture
def components(rng, panel_factory):
    """SCM, F and MP built from one demeaned 6 x 40 panel."""
    train, _ = demean(panel_factory(rng.standard_normal((6, 40))))
    s = estimators.sample_covariance(train)
    return s, estimators.shrinkage_target_F(s), estimators.mp_clean(s, train.dimensionality)


def test_scm_single_row() -> None:
    one_row = estimators.scm_matrix(np.array([[-1.0, 0.0, 1.0]]))
    np.testing.assert_allclose(one_row, [[2.0 / 3.0]])


def test_scm_identical_rows(panel_factory) -> None:
    panel = panel_factory([[-1.0, 0.5, 0.5], [-1.0, 0.5, 0.5]])
    s = estimators.sample_covariance(panel).matrix
    assert np.all(s == s[0, 0])


def test_scm_matches_double_loop(rng, panel_factory) -> None:
    train, _ = demean(panel_factory(rng.standard_normal((4, 50))))
    x = train.returns
    expected = np.array(
        [[sum(x[i, t] * x[j, t] for t in range(50)) / 50 for j in range(4)] for i in range(4)]
    )
    result = estimators.sample_covariance(train).matrix
    np.testing.assert_allclose(result, expected, atol=1e-12)


def test_scm_requires_demeaned(panel_factory) -> None:
    with pytest.raises(NotDemeaned):
        estimators.sample_covariance(panel_factory([[1.0, 2.0, 3.0], [0.0, 1.0, -1.0]]))


def test_identity_target_mean_variance() -> None:
    out = estimators.identity_target(scm(np.diag([1.0, 3.0])))
    np.testing.assert_array_equal(out.matrix, np.diag([2.0, 2.0]))
    assert out.kind == EstimatorKind.IDENTITY_TARGET


def test_identity_target_fixed_point() -> None:
    target = estimators.identity_target(scm(np.eye(3)))
    np.testing.assert_array_equal(target.matrix, np.eye(3))


def test_f_target_two_assets_fixed_point() -> None:
    s = [[1.0, 0.2], [0.2, 4.0]]
    np.testing.assert_array_equal(estimators.shrinkage_target_F(scm(s)).matrix, s)


def test_f_target_identity() -> None:
    target = estimators.shrinkage_target_F(scm(np.eye(3)))
    np.testing.assert_array_equal(target.matrix, np.eye(3))


def test_f_target_averages_off_diagonal() -> None:
    s = np.array([[1.0, 0.1, 0.2], [0.1, 1.0, 0.3], [0.2, 0.3, 1.0]])
    f = estimators.shrinkage_target_F(scm(s)).matrix
    off = ~np.eye(3, dtype=bool)
    np.testing.assert_allclose(f[off], 0.2, rtol=1e-15)
    np.testing.assert_array_equal(np.diag(f), np.diag(s))


def test_linear_shrinkage_endpoints_and_midpoint() -> None:
    s = scm([[2.0, 0.0], [0.0, 2.0]])
    f = CovarianceEstimate(matrix=np.eye(2), kind=EstimatorKind.F_TARGET)
    np.testing.assert_array_equal(estimators.linear_shrinkage(s, f, 0.0).matrix, s.matrix)
    np.testing.assert_array_equal(estimators.linear_shrinkage(s, f, 1.0).matrix, f.matrix)
    half = estimators.linear_shrinkage(s, f, 0.5)
    np.testing.assert_array_equal(half.matrix, [[1.5, 0.0], [0.0, 1.5]])
    assert half.meta == {"rho": 0.5}


def test_linear_shrinkage_is_affine(components) -> None:
    s, f, _ = components
    lo, hi = (estimators.linear_shrinkage(s, f, r).matrix for r in (0.0, 1.0))
    mid = estimators.linear_shrinkage(s, f, 0.5).matrix
    np.testing.assert_allclose(mid, (lo + hi) / 2.0, atol=1e-15)


def test_linear_shrinkage_rejects_bad_rho(components) -> None:
    s, f, _ = components
    with pytest.raises(RhoOutOfRange):
        estimators.linear_shrinkage(s, f, 1.5)


def test_linear_shrinkage_dimension_mismatch() -> None:
    with pytest.raises(DimensionMismatch):
        estimators.linear_shrinkage(scm(np.eye(2)), scm(np.eye(3)), 0.5)


def test_mp_clean_null_fixed_point() -> None:
    s = scm(2.5 * np.eye(4))
    np.testing.assert_allclose(estimators.mp_clean(s, 0.5).matrix, s.matrix, atol=1e-15)


def test_mp_clean_keeps_variances_and_psd(components) -> None:
    s, _, mp = components
    np.testing.assert_array_equal(np.diag(mp.matrix), np.diag(s.matrix))
    assert np.linalg.eigvalsh(mp.matrix).min() >= -1e-10 * np.trace(mp.matrix)
    assert mp.meta == {"c": pytest.approx(6 / 40)}


def test_mp_clean_zero_variance() -> None:
    with pytest.raises(ZeroVariance):
        estimators.mp_clean(scm(np.diag([1.0, 0.0])), 0.5)


def test_mp_clean_resets_correlation_diagonal(rng, panel_factory) -> None:
    scales = np.linspace(0.005, 0.05, 30)[:, None]
    factor = rng.standard_normal((1, 60))
    noise = rng.standard_normal((30, 60))
    train, _ = demean(panel_factory(scales * (noise + 0.7 * factor)))
    s = estimators.sample_covariance(train)
    c = train.dimensionality
    std = np.sqrt(np.diag(s.matrix))
    corr = s.matrix / np.outer(std, std)
    values, vectors = np.linalg.eigh(corr)
    lo, hi = (1.0 - np.sqrt(c)) ** 2, (1.0 + np.sqrt(c)) ** 2
    inside = (values > lo) & (values < hi)
    values[inside] = values[inside].mean()
    reconstructed = (vectors * values) @ vectors.T
    reset = reconstructed.copy()
    np.fill_diagonal(reset, 1.0)
    if np.linalg.eigvalsh(reset).min() >= -1e-10 * 30:
        expected_corr = reset
    else:
        # indefinite after the reset: unit diagonal by congruence instead
        d = np.sqrt(np.diag(reconstructed))
        expected_corr = reconstructed / np.outer(d, d)
    result = estimators.mp_clean(s, c).matrix
    expected = expected_corr * np.outer(std, std)
    np.testing.assert_allclose(result, expected, atol=1e-12 * std.max() ** 2)
    np.testing.assert_array_equal(np.diag(result), np.diag(s.matrix))


def test_mp_clean_warns_near_unit_dimensionality(caplog, components) -> None:
    s, _, _ = components
    with caplog.at_level(logging.WARNING, logger="app.services.estimators"):
        estimators.mp_clean(s, 0.95)
    assert "close to 1" in caplog.text


@pytest.mark.slow
def test_mp_clean_keeps_exactly_one_spike_above_edge() -> None:
    m, n = 100, 200
    bounds = rmt.mp_bounds(MpParams(c=m / n, sigma2=1.0))
    hits = 0
    for seed in range(20):
        spec = synthetic.spike_spec(m, [10.0], direction_seed=seed)
        pop = synthetic.build_population(spec)
        train, _ = demean(synthetic.sample_panel(pop, n, spec, seed))
        mp = estimators.mp_clean(estimators.sample_covariance(train), m / n)
        corr, _ = estimators.correlation_from_covariance(mp.matrix)
        hits += int(np.sum(np.linalg.eigvalsh(corr) > bounds.upper) == 1)
    assert hits >= 18


def test_combine_limiting_cases(components) -> None:
    s, f, mp = components

    def at(theta: float, phi: float) -> np.ndarray:
        return estimators.combine(f, mp, s, CombinationWeights(theta=theta, phi=phi)).matrix

    for theta in (0.0, 0.3, 1.0):
        np.testing.assert_array_equal(at(theta, 0.0), s.matrix)
    np.testing.assert_array_equal(at(0.0, 1.0), mp.matrix)
    np.testing.assert_array_equal(at(1.0, 1.0), f.matrix)
    np.testing.assert_allclose(
        at(1.0, 0.4), estimators.linear_shrinkage(s, f, 0.4).matrix, atol=1e-15
    )
    np.testing.assert_allclose(at(0.0, 0.4), 0.4 * mp.matrix + 0.6 * s.matrix, atol=1e-15)


@pytest.mark.parametrize("theta,phi", [(0.0, 0.0), (0.25, 0.75), (0.5, 0.5), (1.0, 1.0)])
def test_weight_map_lands_on_simplex(theta: float, phi: float) -> None:
    alpha, beta, gamma = CombinationWeights(theta=theta, phi=phi).simplex()
    assert min(alpha, beta, gamma) >= 0.0
    assert abs(alpha + beta + gamma - 1.0) <= 1e-15


def test_combine_outputs_are_symmetric_psd(components) -> None:
    s, f, mp = components
    out = estimators.combine(f, mp, s, CombinationWeights(theta=0.3, phi=0.6))
    np.testing.assert_array_equal(out.matrix, out.matrix.T)
    assert out.meta == {"theta": 0.3, "phi": 0.6}


def test_validation_intensity_deterministic_and_on_grid(rng, panel_factory) -> None:
    train, _ = demean(panel_factory(0.01 * rng.standard_normal((5, 80))))
    s = estimators.sample_covariance(train)
    f = estimators.shrinkage_target_F(s)
    first = estimators.shrinkage_intensity(train, s, f, rho_step=0.25)
    second = estimators.shrinkage_intensity(train, s, f, rho_step=0.25)
    assert first == second
    assert first in {0.0, 0.25, 0.5, 0.75, 1.0}


def test_analytic_intensity_in_unit_interval(rng, panel_factory) -> None:
    train, _ = demean(panel_factory(rng.standard_normal((8, 30))))
    s = estimators.sample_covariance(train)
    f = estimators.shrinkage_target_F(s)
    rho = estimators.shrinkage_intensity(train, s, f, method=ShrinkageMethod.ANALYTIC)
    assert 0.0 <= rho <= 1.0


def test_analytic_intensity_zero_when_target_equals_scm(panel_factory) -> None:
    # two assets: F equals the SCM, nothing to shrink toward
    train, _ = demean(panel_factory([[0.1, -0.2, 0.3, -0.2], [0.0, 0.1, -0.1, 0.0]]))
    s = estimators.sample_covariance(train)
    f = estimators.shrinkage_target_F(s)
    assert estimators.shrinkage_intensity(train, s, f, method=ShrinkageMethod.ANALYTIC) == 0.0


@pytest.mark.slow
def test_validation_intensity_prefers_target_when_population_is_f() -> None:
    # equicorrelated population: F has the population structure
    m, n = 20, 60
    pop = 0.5 * np.eye(m) + 0.5 * np.ones((m, m))
    root = np.linalg.cholesky(pop)
    picks = []
    for seed in range(10):
        gen = np.random.Generator(np.random.PCG64(seed))
        train, _ = demean(make_panel(0.01 * root @ gen.standard_normal((m, n))))
        s = estimators.sample_covariance(train)
        f = estimators.shrinkage_target_F(s)
        picks.append(estimators.shrinkage_intensity(train, s, f, rho_step=0.25))
    assert float(np.mean(picks)) > 0.4


def test_spike_estimators_are_psd() -> None:
    spec = synthetic.spike_spec(12, [6.0])
    train, _ = demean(synthetic.sample_panel(synthetic.build_population(spec), 40, spec, 1))
    s = estimators.sample_covariance(train)
    built = (
        estimators.identity_target(s),
        estimators.shrinkage_target_F(s),
        estimators.mp_clean(s, train.dimensionality),
    )
    for est in built:
        assert np.linalg.eigvalsh(est.matrix).min() >= -1e-10 * np.trace(est.matrix)
