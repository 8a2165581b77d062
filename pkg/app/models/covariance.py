"""Covariance, spectral and Marchenko-Pastur domain values."""

import math
from enum import StrEnum
from typing import Any

import numpy as np
from pydantic import Field, field_validator, model_validator

from app.core.exceptions import (
    DimensionMismatch,
    InvalidParams,
    NotPsd,
    NotSymmetric,
)
from app.models.base import DomainModel, frozen_array

SYMMETRY_TOL = 1e-12
PSD_TOL = 1e-10
ORTHONORMAL_TOL = 1e-10


class EstimatorKind(StrEnum):
    """Estimator provenance tag; values double as CLI names."""

    SCM = "scm"
    IDENTITY_TARGET = "identity"
    F_TARGET = "f"
    SHRINK = "shrink"
    MP = "mp"
    COMBINED = "combined"
    POPULATION = "population"


# kinds that can be estimated from data
ESTIMATOR_KINDS: tuple[EstimatorKind, ...] = (
    EstimatorKind.SCM,
    EstimatorKind.IDENTITY_TARGET,
    EstimatorKind.F_TARGET,
    EstimatorKind.SHRINK,
    EstimatorKind.MP,
    EstimatorKind.COMBINED,
)


def check_symmetric(a: np.ndarray) -> None:
    """Raise NotSymmetric unless |a_ij - a_ji| <= tol * max(1, |a_ij|)."""
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    gap = np.abs(a - a.T)
    if (gap > SYMMETRY_TOL * np.maximum(1.0, np.abs(a))).any():
        raise NotSymmetric(f"matrix is not symmetric (max gap {gap.max():.3e})")


def symmetrize(a: np.ndarray) -> np.ndarray:
    return (a + a.T) / 2.0


class SpectralDecomposition(DomainModel):
    """Descending eigenvalues with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @field_validator("eigenvalues", mode="before")
    @classmethod
    def freeze_values(cls, v: Any) -> np.ndarray:
        return frozen_array(v, ndim=1)

    @field_validator("eigenvectors", mode="before")
    @classmethod
    def freeze_vectors(cls, v: Any) -> np.ndarray:
        return frozen_array(v, ndim=2)

    @model_validator(mode="after")
    def check_invariants(self) -> "SpectralDecomposition":
        m = self.eigenvalues.shape[0]
        if self.eigenvectors.shape != (m, m):
            raise DimensionMismatch(
                f"{m} eigenvalues but eigenvector matrix {self.eigenvectors.shape}"
            )
        if (np.diff(self.eigenvalues) > 0).any():
            raise InvalidParams("eigenvalues must be sorted in descending order")
        v = self.eigenvectors
        if np.abs(v.T @ v - np.eye(m)).max() > ORTHONORMAL_TOL:
            raise InvalidParams("eigenvectors are not orthonormal")
        return self

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]


class CovarianceEstimate(DomainModel):
    """Symmetric PSD matrix in squared daily return units, tagged by estimator."""

    matrix: np.ndarray
    kind: EstimatorKind
    meta: dict[str, float] = Field(default_factory=dict)

    @field_validator("matrix", mode="before")
    @classmethod
    def freeze_matrix(cls, v: Any) -> np.ndarray:
        return frozen_array(v, ndim=2)

    @model_validator(mode="after")
    def check_invariants(self) -> "CovarianceEstimate":
        a = self.matrix
        check_symmetric(a)
        if not np.isfinite(a).all():
            raise NotPsd("covariance contains non-finite entries")
        if (np.diag(a) < 0).any():
            raise NotPsd("covariance has a negative variance on the diagonal")
        trace = float(np.trace(a))
        min_eig = float(np.linalg.eigvalsh(symmetrize(a))[0])
        if min_eig < -PSD_TOL * abs(trace):
            raise NotPsd(f"covariance is not PSD (smallest eigenvalue {min_eig:.3e})")
        return self

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


class CombinationWeights(DomainModel):
    """(theta, phi) in [0,1]^2 parameterizing the combined estimator."""

    theta: float
    phi: float

    @model_validator(mode="after")
    def check_range(self) -> "CombinationWeights":
        for name in ("theta", "phi"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise InvalidParams(f"{name} must lie in [0, 1], got {value}")
        return self

    @property
    def alpha(self) -> float:
        """Weight of the shrinkage target F."""
        return self.theta * self.phi

    @property
    def beta(self) -> float:
        """Weight of the clipped matrix."""
        return (1.0 - self.theta) * self.phi

    @property
    def gamma(self) -> float:
        """Weight of the sample covariance."""
        return 1.0 - self.phi

    def simplex(self) -> tuple[float, float, float]:
        return self.alpha, self.beta, self.gamma


class MpParams(DomainModel):
    """Dimensionality constant c = M/N and entry variance sigma^2."""

    c: float
    sigma2: float = 1.0

    @model_validator(mode="after")
    def check_range(self) -> "MpParams":
        if not (0.0 < self.c < 1.0) or not math.isfinite(self.c):
            raise InvalidParams(f"c must lie in (0, 1), got {self.c}")
        if not (self.sigma2 > 0.0) or not math.isfinite(self.sigma2):
            raise InvalidParams(f"sigma2 must be positive, got {self.sigma2}")
        return self


class MpBounds(DomainModel):
    """Support [lower, upper] of the Marchenko-Pastur law."""

    lower: float
    upper: float

    @model_validator(mode="after")
    def check_order(self) -> "MpBounds":
        if not (0.0 <= self.lower < self.upper):
            raise InvalidParams(f"invalid bounds [{self.lower}, {self.upper}]")
        return self

    def contains(self, x: np.ndarray) -> np.ndarray:
        """Strict interior test; values equal to a bound are outside."""
        return (x > self.lower) & (x < self.upper)
