"""Symmetric eigendecomposition and reconstruction."""

import numpy as np

from app.core.exceptions import NoConvergence
from app.models.covariance import SpectralDecomposition, check_symmetric, symmetrize


def eigh(a: np.ndarray) -> SpectralDecomposition:
    """Eigendecomposition of a symmetric matrix.

    Eigenvalues are returned in descending order. Each eigenvector is signed so
    that its largest-magnitude component is positive (first such component on
    ties), which makes the output reproducible for identical input.
    """
    a = np.asarray(a, dtype=np.float64)
    check_symmetric(a)
    try:
        values, vectors = np.linalg.eigh(symmetrize(a))
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"eigendecomposition did not converge: {exc}") from exc

    order = np.argsort(values, kind="stable")[::-1]
    values, vectors = values[order], vectors[:, order]

    mags = np.abs(vectors)
    # first component within rounding of the column maximum
    pivots = np.argmax(mags >= mags.max(axis=0) * (1.0 - 1e-12), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return SpectralDecomposition(eigenvalues=values, eigenvectors=vectors * signs)


def eigvals_descending(a: np.ndarray) -> np.ndarray:
    """Eigenvalues only, descending."""
    a = np.asarray(a, dtype=np.float64)
    check_symmetric(a)
    try:
        values = np.linalg.eigvalsh(symmetrize(a))
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"eigenvalue computation did not converge: {exc}") from exc
    return values[::-1].copy()


def reconstruct(d: SpectralDecomposition) -> np.ndarray:
    """V diag(lambda) V^T, symmetrized."""
    v = d.eigenvectors
    b = (v * d.eigenvalues) @ v.T
    return symmetrize(b)
