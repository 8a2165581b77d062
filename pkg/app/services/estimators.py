"""Sample covariance, shrinkage targets, MP clipping and the convex combination."""

import logging
import math

import numpy as np

from app.core.exceptions import (
    DimensionMismatch,
    InvalidParams,
    NotDemeaned,
    RhoOutOfRange,
    ZeroVariance,
)
from app.models.backtest import ShrinkageMethod
from app.models.covariance import (
    PSD_TOL,
    CombinationWeights,
    CovarianceEstimate,
    EstimatorKind,
    MpParams,
    symmetrize,
)
from app.models.panel import ReturnsPanel
from app.models.portfolio import ReturnForecast
from app.services import portfolio, rmt, spectral
from app.services.market_data import demean

logger = logging.getLogger(__name__)

DEMEAN_TOL = 1e-10
# warn when M/N gets this close to the edge of the MP regime
C_NEAR_ONE = 0.9


def scm_matrix(x: np.ndarray) -> np.ndarray:
    """X X^T / N for an already demeaned M x N matrix."""
    x = np.asarray(x, dtype=np.float64)
    return symmetrize(x @ x.T / x.shape[1])


def sample_covariance(train: ReturnsPanel) -> CovarianceEstimate:
    """Sample covariance with the 1/N normalization."""
    x = train.returns
    scale = np.maximum(np.abs(x).max(axis=1), np.finfo(np.float64).tiny)
    means = x.mean(axis=1)
    if (np.abs(means) > DEMEAN_TOL * scale).any():
        worst = int(np.argmax(np.abs(means) / scale))
        raise NotDemeaned(
            f"asset {train.assets[worst]} has mean {means[worst]:.3e}; demean first"
        )
    return CovarianceEstimate(matrix=scm_matrix(x), kind=EstimatorKind.SCM)


def _require_kind(est: CovarianceEstimate, kind: EstimatorKind, role: str) -> None:
    if est.kind != kind:
        raise InvalidParams(
            f"{role} must be a {kind.value} estimate, got {est.kind.value}"
        )


def identity_target(scm: CovarianceEstimate) -> CovarianceEstimate:
    """Scaled identity (trace / M) I."""
    _require_kind(scm, EstimatorKind.SCM, "scm")
    m = scm.dim
    scale = float(np.trace(scm.matrix)) / m
    return CovarianceEstimate(matrix=scale * np.eye(m), kind=EstimatorKind.IDENTITY_TARGET)


def shrinkage_target_F(scm: CovarianceEstimate) -> CovarianceEstimate:
    """Sample variances on the diagonal, mean sample covariance elsewhere."""
    _require_kind(scm, EstimatorKind.SCM, "scm")
    s = scm.matrix
    m = scm.dim
    if m < 2:
        raise DimensionMismatch("the F target needs at least 2 assets")
    off = ~np.eye(m, dtype=bool)
    mean_cov = float(s[off].mean())
    f = np.full((m, m), mean_cov)
    np.fill_diagonal(f, np.diag(s))
    return CovarianceEstimate(matrix=f, kind=EstimatorKind.F_TARGET)


def linear_shrinkage(
    scm: CovarianceEstimate, target: CovarianceEstimate, rho: float
) -> CovarianceEstimate:
    """rho F + (1 - rho) SCM."""
    if scm.dim != target.dim:
        raise DimensionMismatch(
            f"scm is {scm.dim}x{scm.dim}, target {target.dim}x{target.dim}"
        )
    if not (0.0 <= rho <= 1.0):
        raise RhoOutOfRange(f"shrinkage intensity must lie in [0, 1], got {rho}")
    matrix = rho * target.matrix + (1.0 - rho) * scm.matrix
    return CovarianceEstimate(matrix=matrix, kind=EstimatorKind.SHRINK, meta={"rho": rho})


def shrinkage_intensity(
    train: ReturnsPanel,
    scm: CovarianceEstimate,
    target: CovarianceEstimate,
    *,
    method: ShrinkageMethod = ShrinkageMethod.VALIDATION,
    forecast: ReturnForecast | None = None,
    rho_step: float = 0.05,
    validation_fraction: float = 0.25,
) -> float:
    """Choose rho for the F target.

    VALIDATION refits SCM and F on the first part of the (demeaned) window, solves
    the minimum-variance problem for every rho on a grid and keeps the rho with
    the lowest realized variance on the held-out tail; ties go to the smaller rho.
    ANALYTIC uses the asymptotic estimate of the optimal intensity.
    """
    if method == ShrinkageMethod.ANALYTIC:
        return _analytic_intensity(train, scm, target)

    n = train.n_days
    n_fit = int(math.floor((1.0 - validation_fraction) * n))
    if n_fit < 2 or n - n_fit < 2:
        logger.warning("Training window of %d days too short for rho validation", n)
        return 0.0

    fit, _ = demean(train.select_days(0, n_fit))
    validation = train.returns[:, n_fit:]
    fit_scm = sample_covariance(fit)
    fit_f = shrinkage_target_F(fit_scm)
    fc = forecast or ReturnForecast.unconstrained(train.n_assets)

    intervals = int(round(1.0 / rho_step))
    best_rho, best_var = 0.0, math.inf
    for k in range(intervals + 1):
        rho = k / intervals
        matrix = rho * fit_f.matrix + (1.0 - rho) * fit_scm.matrix
        p = portfolio.solve_min_variance(matrix, fc).weights
        var = float(np.var(p @ validation))
        if var < best_var:
            best_rho, best_var = rho, var
    logger.debug("Validation picked rho=%.3f (variance %.3e)", best_rho, best_var)
    return best_rho


def _analytic_intensity(
    train: ReturnsPanel, scm: CovarianceEstimate, target: CovarianceEstimate
) -> float:
    x = train.returns
    n = train.n_days
    s = scm.matrix
    y = x**2
    pi_mat = (y @ y.T) / n - s**2
    # F matches S on the diagonal, so only off-diagonal estimation noise counts
    numerator = float(pi_mat.sum() - np.trace(pi_mat))
    gamma = float(np.linalg.norm(s - target.matrix, "fro") ** 2)
    if gamma == 0.0:
        return 0.0
    return float(min(max(numerator / gamma / n, 0.0), 1.0))


def correlation_from_covariance(s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Correlation matrix and standard deviations of a covariance."""
    d = np.diag(s).copy()
    if (d <= 0).any():
        raise ZeroVariance("every asset needs a positive variance")
    std = np.sqrt(d)
    corr = s / np.outer(std, std)
    np.fill_diagonal(corr, 1.0)
    return symmetrize(corr), std


def mp_clean(scm: CovarianceEstimate, c: float) -> CovarianceEstimate:
    """Clip the correlation spectrum to the MP bulk and rescale to covariance.

    The reconstructed correlation gets its diagonal reset to exactly 1. If
    that reset leaves the matrix indefinite, the unit diagonal is restored by
    congruence with the reconstructed diagonal instead, which keeps it PSD.
    """
    _require_kind(scm, EstimatorKind.SCM, "scm")
    if c >= C_NEAR_ONE:
        logger.warning(
            "Dimensionality c=%.3f is close to 1; MP clipping is unreliable", c
        )
    s = scm.matrix
    variances = np.diag(s).copy()
    corr, std = correlation_from_covariance(s)

    bounds = rmt.mp_bounds(MpParams(c=c, sigma2=1.0))
    decomposition = spectral.eigh(corr)
    clipped = rmt.clip_eigenvalues(decomposition, bounds)
    reconstructed = spectral.reconstruct(clipped)

    cleaned = reconstructed.copy()
    np.fill_diagonal(cleaned, 1.0)
    cleaned = symmetrize(cleaned)
    if float(np.linalg.eigvalsh(cleaned)[0]) < -PSD_TOL * scm.dim:
        logger.warning("Diagonal reset left the cleaned correlation indefinite")
        scale = np.sqrt(
            np.clip(np.diag(reconstructed), np.finfo(np.float64).tiny, None)
        )
        cleaned = reconstructed / np.outer(scale, scale)
        np.fill_diagonal(cleaned, 1.0)

    matrix = symmetrize(cleaned * np.outer(std, std))
    np.fill_diagonal(matrix, variances)
    n_kept = int((~bounds.contains(decomposition.eigenvalues)).sum())
    logger.debug("MP clipping kept %d of %d eigenvalues (c=%.3f)", n_kept, scm.dim, c)
    return CovarianceEstimate(matrix=matrix, kind=EstimatorKind.MP, meta={"c": c})


def combine_matrices(
    f: np.ndarray, mp: np.ndarray, scm: np.ndarray, w: CombinationWeights
) -> np.ndarray:
    """alpha F + beta MP + gamma SCM on raw arrays."""
    alpha, beta, gamma = w.simplex()
    return alpha * f + beta * mp + gamma * scm


def combine(
    f: CovarianceEstimate,
    mp: CovarianceEstimate,
    scm: CovarianceEstimate,
    w: CombinationWeights,
) -> CovarianceEstimate:
    """theta phi F + (1 - theta) phi MP + (1 - phi) SCM."""
    if not (f.dim == mp.dim == scm.dim):
        raise DimensionMismatch(
            f"dimensions differ: F {f.dim}, MP {mp.dim}, SCM {scm.dim}"
        )
    _require_kind(f, EstimatorKind.F_TARGET, "f")
    _require_kind(mp, EstimatorKind.MP, "mp")
    _require_kind(scm, EstimatorKind.SCM, "scm")
    return CovarianceEstimate(
        matrix=combine_matrices(f.matrix, mp.matrix, scm.matrix, w),
        kind=EstimatorKind.COMBINED,
        meta={"theta": w.theta, "phi": w.phi},
    )
