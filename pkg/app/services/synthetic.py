"""Synthetic returns from NULL and SPIKE population models."""

import logging
import math
from datetime import date, timedelta

import numpy as np

from app.core.exceptions import DimensionMismatch, InvalidParams, NotPsd
from app.models.backtest import ShrinkageMethod
from app.models.covariance import (
    ESTIMATOR_KINDS,
    PSD_TOL,
    CovarianceEstimate,
    EstimatorKind,
    symmetrize,
)
from app.models.panel import ReturnsPanel
from app.models.synthetic import Distribution, SeedEvaluation, Spike, SpikeSpec
from app.services import estimators, spectral, tuning
from app.services.market_data import demean

logger = logging.getLogger(__name__)

AR1_BURN_IN = 100
FIRST_DATE = "2000-01-03"


def business_days(n_days: int) -> list[date]:
    """Consecutive Monday-to-Friday dates starting at FIRST_DATE (a Monday)."""
    start = date.fromisoformat(FIRST_DATE)
    return [start + timedelta(days=7 * (k // 5) + k % 5) for k in range(n_days)]


def rng_for(seed: int) -> np.random.Generator:
    """PCG64 stream for a seed."""
    return np.random.Generator(np.random.PCG64(seed))


def build_population(spec: SpikeSpec) -> CovarianceEstimate:
    """base_variance (I + sum_k (lambda_k - 1) u_k u_k^T)."""
    u = spec.directions()
    boost = np.array([s.eigenvalue - 1.0 for s in spec.spikes])
    matrix = np.eye(spec.dim) + (u * boost) @ u.T
    return CovarianceEstimate(
        matrix=symmetrize(spec.base_variance * matrix), kind=EstimatorKind.POPULATION
    )


def _square_root(pop: CovarianceEstimate) -> np.ndarray:
    d = spectral.eigh(pop.matrix)
    if d.eigenvalues[-1] < -PSD_TOL * abs(float(np.trace(pop.matrix))):
        raise NotPsd("population covariance is not PSD")
    root = np.sqrt(np.clip(d.eigenvalues, 0.0, None))
    return symmetrize((d.eigenvectors * root) @ d.eigenvectors.T)


def _innovations(spec: SpikeSpec, n_days: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-variance M x N innovations of the configured distribution and memory."""
    burn = AR1_BURN_IN if spec.temporal_ar1 > 0 else 0
    shape = (spec.dim, n_days + burn)
    if spec.distribution == Distribution.STUDENT_T:
        nu = float(spec.nu or math.inf)
        z = rng.standard_t(nu, size=shape) / math.sqrt(nu / (nu - 2.0))
    else:
        z = rng.standard_normal(size=shape)
    if burn:
        a = spec.temporal_ar1
        scale = math.sqrt(1.0 - a * a)
        for t in range(1, shape[1]):
            z[:, t] = a * z[:, t - 1] + scale * z[:, t]
        z = z[:, burn:]
    return z


def sample_panel(
    pop: CovarianceEstimate, n_days: int, spec: SpikeSpec, seed: int
) -> ReturnsPanel:
    """Draw x_t = A z_t with A the symmetric square root of the population matrix."""
    if n_days < 2:
        raise InvalidParams(f"n_days must be >= 2, got {n_days}")
    if pop.dim != spec.dim:
        raise DimensionMismatch(f"population is {pop.dim}-dimensional, spec {spec.dim}")
    root = _square_root(pop)
    z = _innovations(spec, n_days, rng_for(seed))
    return ReturnsPanel(
        assets=[f"A{i:03d}" for i in range(spec.dim)],
        dates=business_days(n_days),
        returns=root @ z,
    )


def frobenius_error(a: CovarianceEstimate, b: CovarianceEstimate) -> float:
    if a.dim != b.dim:
        raise DimensionMismatch(f"{a.dim}x{a.dim} vs {b.dim}x{b.dim}")
    return float(np.linalg.norm(a.matrix - b.matrix, "fro"))


def random_orthonormal_directions(dim: int, k: int, seed: int) -> np.ndarray:
    """dim x k matrix with orthonormal columns, uniformly distributed."""
    if not (0 <= k <= dim):
        raise InvalidParams(f"need 0 <= k <= dim, got k={k}, dim={dim}")
    q, r = np.linalg.qr(rng_for(seed).standard_normal((dim, k)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def spike_spec(
    dim: int,
    eigenvalues: list[float],
    *,
    base_variance: float = 1.0,
    distribution: Distribution = Distribution.GAUSSIAN,
    nu: float | None = None,
    temporal_ar1: float = 0.0,
    direction_seed: int | None = None,
) -> SpikeSpec:
    """SpikeSpec with standard-basis directions, or random ones when seeded."""
    directions: list[list[float] | None] = [None] * len(eigenvalues)
    if direction_seed is not None and eigenvalues:
        u = random_orthonormal_directions(dim, len(eigenvalues), direction_seed)
        directions = [u[:, k].tolist() for k in range(len(eigenvalues))]
    return SpikeSpec(
        dim=dim,
        spikes=[
            Spike(eigenvalue=v, direction=d) for v, d in zip(eigenvalues, directions)
        ],
        base_variance=base_variance,
        distribution=distribution,
        nu=nu,
        temporal_ar1=temporal_ar1,
    )


def evaluate_seed(spec: SpikeSpec, n_days: int, seed: int) -> SeedEvaluation:
    """Distance to the population matrix of each estimator on one sample.

    COMBINED uses oracle weights and SHRINK the analytic intensity, since
    neither needs a held-out segment.
    """
    pop = build_population(spec)
    train, _ = demean(sample_panel(pop, n_days, spec, seed))
    scm = estimators.sample_covariance(train)
    f = estimators.shrinkage_target_F(scm)
    mp = estimators.mp_clean(scm, train.dimensionality)
    rho = estimators.shrinkage_intensity(train, scm, f, method=ShrinkageMethod.ANALYTIC)
    weights, combined_err = tuning.oracle_weights(pop, f, mp, scm)

    built = {
        EstimatorKind.SCM: scm,
        EstimatorKind.IDENTITY_TARGET: estimators.identity_target(scm),
        EstimatorKind.F_TARGET: f,
        EstimatorKind.SHRINK: estimators.linear_shrinkage(scm, f, rho),
        EstimatorKind.MP: mp,
    }
    errors = {kind.value: frobenius_error(pop, est) for kind, est in built.items()}
    errors[EstimatorKind.COMBINED.value] = combined_err
    logger.debug("Seed %d: combined error %.4e", seed, combined_err)
    return SeedEvaluation(
        seed=seed,
        errors={k.value: errors[k.value] for k in ESTIMATOR_KINDS},
        theta=weights.theta,
        phi=weights.phi,
        rho=rho,
    )


def synthetic_fixture(
    m: int = 20,
    n_days: int = 750,
    spikes: tuple[float, ...] = (10.0,),
    seed: int = 0,
    daily_vol: float = 0.01,
    drift: float = 4e-4,
) -> ReturnsPanel:
    """SPIKE panel in daily return units with a common positive drift."""
    spec = spike_spec(m, list(spikes), base_variance=daily_vol**2)
    panel = sample_panel(build_population(spec), n_days, spec, seed)
    return panel.with_returns(panel.returns + drift)
