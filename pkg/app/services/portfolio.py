"""Minimum-variance portfolio with simplex and minimum-return constraints.

The solver is an accelerated projected gradient method on 1/2 p^T S p with
step 1/L, L the largest eigenvalue of S. Momentum is restarted every
`restart_every` iterations and whenever the objective goes up. Projections
onto the feasible set {p >= 0, 1^T p = 1, g^T p >= r} are exact: the simplex
part uses the sorting method, and when the return constraint is active the
multiplier of the half-space is found by a scalar root search.
"""

import logging
import math

import numpy as np
from scipy import optimize

from app.core.config import settings
from app.core.exceptions import (
    DimensionMismatch,
    InfeasibleReturn,
    InvalidParams,
    NegativeVariance,
    NotPsd,
)
from app.models.covariance import PSD_TOL, CovarianceEstimate
from app.models.panel import ReturnsPanel
from app.models.portfolio import RETURN_CONSTRAINT_RELAXED, Portfolio, ReturnForecast
from app.services import spectral

logger = logging.getLogger(__name__)

DAYS_PER_YEAR = 365


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {p >= 0, sum p = 1}."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    k = np.nonzero(u - css / ind > 0)[0][-1]
    tau = css[k] / (k + 1)
    return np.maximum(v - tau, 0.0)


def project_feasible(v: np.ndarray, g: np.ndarray, r: float) -> np.ndarray:
    """Euclidean projection onto the simplex intersected with {g^T p >= r}."""
    p = project_simplex(v)
    if r == -math.inf or g @ p >= r:
        return p

    # the projection is project_simplex(v + mu g) for the multiplier mu >= 0
    # at which the return constraint holds with equality
    def shortfall(mu: float) -> float:
        return float(g @ project_simplex(v + mu * g)) - r

    scale = max(float(np.abs(v).max()), 1.0) / max(float(np.abs(g).max()), 1e-300)
    hi = scale
    for _ in range(200):
        if shortfall(hi) >= 0:
            break
        hi *= 2.0
    else:
        raise InfeasibleReturn("return constraint cannot be met on the simplex")

    mu = optimize.brentq(shortfall, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)
    p = project_simplex(v + mu * g)
    step = max(abs(mu), 1e-300) * 1e-14
    while g @ p < r and mu < hi:
        mu = min(hi, mu + step)
        step *= 2.0
        p = project_simplex(v + mu * g)
    return p


def kkt_residual(matrix: np.ndarray, p: np.ndarray, fc: ReturnForecast) -> float:
    """Norm of the gradient mapping L (p - P(p - S p / L)); zero at the optimum."""
    lipschitz = float(spectral.eigvals_descending(matrix)[0])
    if lipschitz <= 0:
        return 0.0
    stepped = project_feasible(p - matrix @ p / lipschitz, fc.g, fc.r_daily)
    return lipschitz * float(np.linalg.norm(p - stepped))


def solve_min_variance(
    matrix: np.ndarray,
    fc: ReturnForecast,
    *,
    relax_infeasible: bool = True,
    x0: np.ndarray | None = None,
    tol: float | None = None,
    max_iter: int | None = None,
    restart_every: int | None = None,
) -> Portfolio:
    """Minimize p^T S p over the long-only simplex with g^T p >= r_daily."""
    s = np.asarray(matrix, dtype=np.float64)
    m = s.shape[0]
    if s.shape != (m, m) or fc.g.shape != (m,):
        raise DimensionMismatch(
            f"covariance {s.shape} and forecast {fc.g.shape} do not match"
        )
    tol = settings.QP_TOLERANCE if tol is None else tol
    max_iter = settings.QP_MAX_ITERATIONS if max_iter is None else max_iter
    restart_every = settings.QP_RESTART_EVERY if restart_every is None else restart_every

    warnings: list[str] = []
    r = fc.r_daily
    if r > float(fc.g.max()):
        if not relax_infeasible:
            raise InfeasibleReturn(
                f"max forecast return {fc.g.max():.3e} is below r_daily {r:.3e}"
            )
        logger.warning(
            "Return target %.3e unreachable (max forecast %.3e); solving without it",
            r,
            fc.g.max(),
        )
        warnings.append(RETURN_CONSTRAINT_RELAXED)
        r = -math.inf
    g = fc.g

    eigenvalues = spectral.eigvals_descending(s)
    if eigenvalues[-1] < -PSD_TOL * abs(float(np.trace(s))):
        raise NotPsd(f"covariance is not PSD (smallest eigenvalue {eigenvalues[-1]:.3e})")
    lipschitz = float(eigenvalues[0])
    start = np.full(m, 1.0 / m) if x0 is None else np.asarray(x0, dtype=np.float64)
    x = project_feasible(start, g, r)
    if lipschitz <= 0:
        return Portfolio(weights=x, warnings=warnings, iterations=0)

    threshold = tol * float(np.linalg.norm(s, "fro"))
    y, t = x.copy(), 1.0
    f_prev = 0.5 * float(x @ s @ x)
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        x_new = project_feasible(y - s @ y / lipschitz, g, r)
        if lipschitz * float(np.linalg.norm(y - x_new)) <= threshold:
            # cheap test at y; confirm at the iterate actually returned
            stepped = project_feasible(x_new - s @ x_new / lipschitz, g, r)
            if lipschitz * float(np.linalg.norm(x_new - stepped)) <= threshold:
                x = x_new
                converged = True
                break
        f_new = 0.5 * float(x_new @ s @ x_new)
        if iterations % restart_every == 0 or f_new > f_prev:
            y, t = x_new.copy(), 1.0
        else:
            t_next = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
            y = x_new + ((t - 1.0) / t_next) * (x_new - x)
            t = t_next
        x, f_prev = x_new, f_new

    if not converged:
        logger.warning("Minimum-variance solver stopped after %d iterations", iterations)
    else:
        logger.debug("Minimum-variance solver converged in %d iterations", iterations)
    return Portfolio(weights=x, warnings=warnings, iterations=iterations)


def min_variance(
    cov: CovarianceEstimate, fc: ReturnForecast, *, relax_infeasible: bool = True
) -> Portfolio:
    """Long-only minimum-variance portfolio meeting the daily return target."""
    return solve_min_variance(cov.matrix, fc, relax_infeasible=relax_infeasible)


def portfolio_variance(p: Portfolio, cov: CovarianceEstimate) -> float:
    """p^T S p in squared daily return units."""
    if p.weights.shape[0] != cov.dim:
        raise DimensionMismatch(
            f"{p.weights.shape[0]} weights for a {cov.dim}x{cov.dim} covariance"
        )
    return float(p.weights @ cov.matrix @ p.weights)


def min_eig_portfolio(cov: CovarianceEstimate) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and its unit eigenvector."""
    d = spectral.eigh(cov.matrix)
    return float(d.eigenvalues[-1]), d.eigenvectors[:, -1].copy()


def annualize_risk(daily_variance: float) -> float:
    """Percent standard deviation per year: 100 sqrt(v) sqrt(365)."""
    if daily_variance < 0:
        raise NegativeVariance(f"variance must be >= 0, got {daily_variance}")
    return 100.0 * math.sqrt(daily_variance) * math.sqrt(DAYS_PER_YEAR)


def daily_return_target(annual_target: float) -> float:
    """Daily return compounding to annual_target over 365 days."""
    if annual_target <= -1.0:
        raise InvalidParams(f"annual target must exceed -100%, got {annual_target}")
    return math.expm1(math.log1p(annual_target) / DAYS_PER_YEAR)


def forecast_returns(train: ReturnsPanel, annual_target: float) -> ReturnForecast:
    """Per-asset mean of raw training returns and the daily return floor."""
    return ReturnForecast(
        g=train.returns.mean(axis=1),
        r_daily=daily_return_target(annual_target),
    )
