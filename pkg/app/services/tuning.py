"""Selection of the combination weights (theta, phi)."""

import itertools
import logging
import math

import numpy as np

from app.core.exceptions import DimensionMismatch, WindowTooSmall
from app.core.parallel import parallel_map
from app.models.covariance import CombinationWeights, CovarianceEstimate
from app.models.panel import ReturnsPanel
from app.models.portfolio import ReturnForecast
from app.models.tuning import GridPoint, GridSpec
from app.services import estimators, portfolio
from app.services.market_data import demean

logger = logging.getLogger(__name__)

TIE_TOL = 1e-12


def simplex_weights(w: CombinationWeights) -> tuple[float, float, float]:
    """(alpha, beta, gamma) multiplying F, MP and SCM."""
    return w.simplex()


def from_simplex(alpha: float, beta: float, gamma: float) -> CombinationWeights:
    """Map simplex weights of (F, MP, SCM) back to (theta, phi)."""
    phi = min(max(alpha + beta, 0.0), 1.0)
    theta = min(max(alpha / (alpha + beta), 0.0), 1.0) if alpha + beta > 0 else 0.0
    return CombinationWeights(theta=theta, phi=phi)


def split_train(
    train: ReturnsPanel, grid: GridSpec
) -> tuple[ReturnsPanel, ReturnsPanel]:
    """Chronological fit/validation split of a training window."""
    n = train.n_days
    n_fit = int(math.floor((1.0 - grid.validation_fraction) * n))
    if n_fit < 2 or n - n_fit < 2:
        raise WindowTooSmall(
            f"{n} training days leave {n_fit} fit and {n - n_fit} validation days"
        )
    if train.n_assets >= n_fit:
        raise WindowTooSmall(
            f"{train.n_assets} assets need more than {n_fit} fit days for MP clipping"
        )
    return train.select_days(0, n_fit), train.select_days(n_fit, n)


def evaluate_grid(
    train: ReturnsPanel, fc: ReturnForecast, grid: GridSpec
) -> list[GridPoint]:
    """Realized validation variance for every (theta, phi) on the grid.

    Points come back ordered by phi, then theta. Parameter pairs that give the
    same matrix (every theta at phi = 0) are solved once.
    """
    fit_raw, validation = split_train(train, grid)
    fit, _ = demean(fit_raw)
    scm = estimators.sample_covariance(fit)
    f = estimators.shrinkage_target_F(scm)
    mp = estimators.mp_clean(scm, fit.dimensionality)

    values = grid.values()
    pairs = [(theta, phi) for phi, theta in itertools.product(values, values)]
    weights = [CombinationWeights(theta=theta, phi=phi) for theta, phi in pairs]
    unique = sorted({w.simplex() for w in weights})

    def realized_variance(key: tuple[float, float, float]) -> float:
        alpha, beta, gamma = key
        matrix = alpha * f.matrix + beta * mp.matrix + gamma * scm.matrix
        p = portfolio.solve_min_variance(matrix, fc).weights
        return float(np.var(p @ validation.returns))

    variances = dict(zip(unique, parallel_map(realized_variance, unique)))
    logger.debug("Evaluated %d grid points (%d distinct)", len(pairs), len(unique))
    return [
        GridPoint(theta=w.theta, phi=w.phi, variance=variances[w.simplex()])
        for w in weights
    ]


def select_weights(points: list[GridPoint]) -> CombinationWeights:
    """Lowest variance; ties go to smaller phi, then smaller theta."""
    best = min(points, key=lambda pt: (pt.variance, pt.phi, pt.theta))
    return CombinationWeights(theta=best.theta, phi=best.phi)


def tune_weights(
    train: ReturnsPanel, fc: ReturnForecast, grid: GridSpec
) -> CombinationWeights:
    """Grid search of (theta, phi) by out-of-fit realized portfolio variance."""
    weights = select_weights(evaluate_grid(train, fc, grid))
    logger.info("Tuned weights theta=%.3f phi=%.3f", weights.theta, weights.phi)
    return weights


def oracle_weights(
    pop: CovarianceEstimate,
    f: CovarianceEstimate,
    mp: CovarianceEstimate,
    scm: CovarianceEstimate,
) -> tuple[CombinationWeights, float]:
    """Frobenius projection of a known population matrix onto hull{F, MP, SCM}.

    The simplex-constrained least squares in (alpha, beta, gamma) has only
    three unknowns, so every active set is solved exactly through its KKT
    system and the best feasible candidate is kept.
    """
    if not (pop.dim == f.dim == mp.dim == scm.dim):
        raise DimensionMismatch("population and component matrices differ in size")
    target = pop.matrix
    components = [f.matrix, mp.matrix, scm.matrix]
    # work in units of the largest matrix so the KKT systems are well scaled
    scale = max(float(np.linalg.norm(m, "fro")) for m in [target, *components])
    scale = scale if scale > 0 else 1.0
    a = [c / scale for c in components]
    t = target / scale
    gram = np.array([[float(np.sum(x * y)) for y in a] for x in a])
    rhs = np.array([float(np.sum(t * x)) for x in a])

    candidates: list[tuple[float, CombinationWeights]] = []
    for size in (1, 2, 3):
        for active in itertools.combinations(range(3), size):
            w = _equality_constrained_lsq(gram, rhs, list(active))
            if w is None:
                continue
            mix = sum(wi * ci for wi, ci in zip(w, components))
            err = float(np.linalg.norm(target - mix, "fro"))
            candidates.append((err, from_simplex(*w)))

    best_err = min(err for err, _ in candidates)
    tol = TIE_TOL * max(1.0, float(np.linalg.norm(target, "fro")))
    ties = [(err, w) for err, w in candidates if err <= best_err + tol]
    err, weights = min(ties, key=lambda item: (item[1].phi, item[1].theta, item[0]))
    return weights, err


def _equality_constrained_lsq(
    gram: np.ndarray, rhs: np.ndarray, active: list[int]
) -> list[float] | None:
    """Minimize w^T G w - 2 b^T w with sum w = 1 on the active set; None if infeasible."""
    k = len(active)
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = 2.0 * gram[np.ix_(active, active)]
    kkt[:k, k] = 1.0
    kkt[k, :k] = 1.0
    b = np.concatenate([2.0 * rhs[active], [1.0]])
    sol = np.linalg.lstsq(kkt, b, rcond=None)[0][:k]
    if (sol < -1e-12).any() or not np.isfinite(sol).all():
        return None
    sol = np.clip(sol, 0.0, None)
    total = sol.sum()
    if total <= 0:
        return None
    w = [0.0, 0.0, 0.0]
    for idx, value in zip(active, sol / total):
        w[idx] = float(value)
    return w
