"""Marchenko-Pastur law: bounds, density, CDF and eigenvalue clipping."""

import math
from collections.abc import Callable

import numpy as np
from scipy import integrate, stats

from app.core.exceptions import EmptyInput
from app.models.covariance import MpBounds, MpParams, SpectralDecomposition


def mp_bounds(p: MpParams) -> MpBounds:
    """Support edges sigma^2 (1 -+ sqrt(c))^2."""
    root = math.sqrt(p.c)
    return MpBounds(
        lower=p.sigma2 * (1.0 - root) ** 2,
        upper=p.sigma2 * (1.0 + root) ** 2,
    )


def mp_density(x: float | np.ndarray, p: MpParams) -> float | np.ndarray:
    """sqrt((x - l-)(l+ - x)) / (2 pi c sigma^2 x) inside the support, 0 outside."""
    b = mp_bounds(p)
    xs = np.asarray(x, dtype=np.float64)
    inside = (xs > b.lower) & (xs < b.upper)
    safe = np.where(inside, xs, 1.0)
    value = np.sqrt(np.clip((safe - b.lower) * (b.upper - safe), 0.0, None)) / (
        2.0 * math.pi * p.c * p.sigma2 * safe
    )
    out = np.where(inside, value, 0.0)
    return float(out) if out.ndim == 0 else out


def mp_cdf(x: float | np.ndarray, p: MpParams) -> float | np.ndarray:
    """Cumulative MP distribution by adaptive quadrature of the density."""
    b = mp_bounds(p)

    def one(t: float) -> float:
        if t <= b.lower:
            return 0.0
        if t >= b.upper:
            return 1.0
        value, _ = integrate.quad(
            lambda s: mp_density(s, p), b.lower, t, epsabs=1e-12, epsrel=1e-10, limit=200
        )
        return min(max(value, 0.0), 1.0)

    xs = np.asarray(x, dtype=np.float64)
    out = np.vectorize(one, otypes=[np.float64])(xs)
    return float(out) if out.ndim == 0 else out


def empirical_spectral_cdf(
    eigenvalues: np.ndarray,
) -> Callable[[float | np.ndarray], float | np.ndarray]:
    """Right-continuous count function G(x) = #{lambda_i <= x} / M."""
    values = np.sort(np.asarray(eigenvalues, dtype=np.float64))
    if values.size == 0:
        raise EmptyInput("no eigenvalues given")
    if not np.isfinite(values).all():
        raise EmptyInput("eigenvalues must be finite")
    m = values.size

    def cdf(x: float | np.ndarray) -> float | np.ndarray:
        counts = np.searchsorted(values, np.asarray(x, dtype=np.float64), side="right")
        out = counts / m
        return float(out) if np.ndim(out) == 0 else out

    return cdf


def empirical_spectral_density(
    eigenvalues: np.ndarray, bins: int = 50, support: tuple[float, float] | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Normalized eigenvalue histogram; returns (bin centers, density)."""
    values = np.asarray(eigenvalues, dtype=np.float64)
    if values.size == 0:
        raise EmptyInput("no eigenvalues given")
    density, edges = np.histogram(values, bins=bins, range=support, density=True)
    return (edges[:-1] + edges[1:]) / 2.0, density


def ks_distance(eigenvalues: np.ndarray, p: MpParams) -> float:
    """Kolmogorov-Smirnov distance between the spectrum and the MP law."""
    values = np.asarray(eigenvalues, dtype=np.float64)
    if values.size == 0:
        raise EmptyInput("no eigenvalues given")
    result = stats.kstest(values, lambda x: mp_cdf(x, p))
    return float(result.statistic)


def split_spectrum(eigenvalues: np.ndarray, b: MpBounds) -> dict[str, int]:
    """Counts of eigenvalues below, inside and above the MP support."""
    values = np.asarray(eigenvalues, dtype=np.float64)
    inside = b.contains(values)
    return {
        "below": int((values <= b.lower).sum()),
        "bulk": int(inside.sum()),
        "above": int((values >= b.upper).sum()),
    }


def clip_eigenvalues(d: SpectralDecomposition, b: MpBounds) -> SpectralDecomposition:
    """Replace eigenvalues strictly inside the bounds by their mean.

    Eigenvalues equal to a bound count as outside. The replacement keeps the
    trace, and the eigenvectors are returned untouched.
    """
    inside = b.contains(d.eigenvalues)
    if not inside.any():
        return d
    values = d.eigenvalues.copy()
    values[inside] = values[inside].mean()
    return SpectralDecomposition(eigenvalues=values, eigenvectors=d.eigenvectors)
