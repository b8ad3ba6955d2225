"""
Hermitian covariance estimates and their analytic counterparts.

Provides:
- HermitianCovariance, the matrix plus a provenance tag
- sample_covariance, ds_shift and ml_ds_shift for the three estimators used by
  the calibration cases
- analytic_covariance and toeplitz_covariance evaluated from a scenario
- sample_wishart_covariances, sample covariances drawn without snapshots
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from django.db import models

from array_model.exceptions import DomainError
from array_model.framed import framed_source_power
from array_model.geometry import manifold_matrix
from array_model.scenario import ScenarioConfig, SnapshotMatrix, SourceDistribution


class CovarianceKind(models.TextChoices):
    RAW_SIGMA = 'raw-Sigma', 'Sample covariance'
    DS = 'DS', 'Diagonally shifted (known internal noise)'
    ML_DS = 'ML-DS', 'Diagonally shifted (estimated internal noise)'
    ANALYTIC = 'analytic', 'Analytic covariance'


@dataclass(frozen=True, eq=False)
class HermitianCovariance:
    """
    M x M Hermitian matrix with the estimator that produced it.

    The matrix is symmetrized on construction, (A + A^H) / 2, so the diagonal
    is exactly real. sample_size is the T the estimate was formed from; for
    analytic matrices it is the T the matrix is being evaluated for.
    """
    matrix: np.ndarray
    kind: CovarianceKind = CovarianceKind.RAW_SIGMA
    sample_size: int | None = None

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DomainError(f'A covariance must be square, got shape {matrix.shape}.')
        if self.sample_size is not None and self.sample_size < 1:
            raise DomainError('Sample size must be positive.')

        matrix = 0.5 * (matrix + matrix.conj().T)
        matrix.setflags(write=False)
        object.__setattr__(self, 'matrix', matrix)
        object.__setattr__(self, 'kind', CovarianceKind(self.kind))

    @property
    def num_sensors(self) -> int:
        return self.matrix.shape[0]

    def scaled(self, factor: float) -> HermitianCovariance:
        return HermitianCovariance(factor * self.matrix, self.kind, self.sample_size)


def sample_covariance(snapshots: SnapshotMatrix) -> HermitianCovariance:
    """Sigma_hat = (1/T) sum_t r[t] r[t]^H."""
    data = snapshots.data
    T = data.shape[1]
    return HermitianCovariance(data @ data.conj().T / T, CovarianceKind.RAW_SIGMA, T)


def ds_shift(sigma_hat: HermitianCovariance, sigma_w2: float) -> HermitianCovariance:
    """
    Remove a known internal-noise level, R_DS = Sigma_hat - sigma_w2 I.

    The diagonal may come out non-positive at small T; that is left for the
    log-domain measurements to reject.
    """
    if sigma_hat.kind != CovarianceKind.RAW_SIGMA:
        raise DomainError(f'The DS estimate is formed from a raw sample covariance, not {sigma_hat.kind}.')
    if sigma_w2 < 0:
        raise DomainError('The internal noise variance cannot be negative.')

    shifted = sigma_hat.matrix - sigma_w2 * np.eye(sigma_hat.num_sensors)
    return HermitianCovariance(shifted, CovarianceKind.DS, sigma_hat.sample_size)


def estimate_noise_floor(sigma_hat: HermitianCovariance, num_sources: int) -> float:
    """Mean of the M - N smallest eigenvalues, the ML estimate of the white noise level."""
    M = sigma_hat.num_sensors
    if not 1 <= num_sources < M:
        raise DomainError(f'The number of sources must lie in [1, {M - 1}], got {num_sources}.')
    eigenvalues = scipy.linalg.eigvalsh(sigma_hat.matrix)
    return max(float(np.mean(eigenvalues[:M - num_sources])), 0.0)


def ml_ds_shift(sigma_hat: HermitianCovariance, num_sources: int) -> tuple[HermitianCovariance, float]:
    """
    Remove an estimated internal-noise level, R_ML-DS = Sigma_hat - sigma_w2_hat I.

    Returns:
        The shifted covariance and sigma_w2_hat.

    Raises:
        DomainError: If num_sources >= M or the input is not a raw sample covariance.
    """
    if sigma_hat.kind != CovarianceKind.RAW_SIGMA:
        raise DomainError(f'The ML-DS estimate is formed from a raw sample covariance, not {sigma_hat.kind}.')

    sigma_w2_hat = estimate_noise_floor(sigma_hat, num_sources)
    shifted = sigma_hat.matrix - sigma_w2_hat * np.eye(sigma_hat.num_sensors)
    return HermitianCovariance(shifted, CovarianceKind.ML_DS, sigma_hat.sample_size), sigma_w2_hat


def effective_source_powers(scenario: ScenarioConfig) -> np.ndarray:
    """Per-sample source powers; framed sources lose power to their sync guards."""
    sources = scenario.sources
    if sources.distribution == SourceDistribution.FRAMED_COMM:
        return np.array([framed_source_power(sources.frame_spec, p) for p in sources.powers])
    return sources.powers


def toeplitz_covariance(scenario: ScenarioConfig) -> HermitianCovariance:
    """C = A R_s A^H + sigma_v2 I, the offset-free Toeplitz covariance."""
    A = manifold_matrix(scenario.sources.azimuths, scenario.geometry)
    powers = effective_source_powers(scenario)
    C = (A * powers) @ A.conj().T + scenario.sigma_v2 * np.eye(scenario.num_sensors)
    return HermitianCovariance(C, CovarianceKind.ANALYTIC, scenario.sample_size)


def analytic_covariance(scenario: ScenarioConfig) -> HermitianCovariance:
    """Sigma = Psi Phi C Phi^* Psi + sigma_w2 I; this is R when sigma_w2 = 0."""
    d = scenario.offsets.as_diagonal()
    C = toeplitz_covariance(scenario).matrix
    sigma = d[:, None] * C * d.conj()[None, :] + scenario.sigma_w2 * np.eye(scenario.num_sensors)
    return HermitianCovariance(sigma, CovarianceKind.ANALYTIC, scenario.sample_size)


def sample_wishart_covariances(R, sample_size: int, replicates: int, rng: np.random.Generator) -> np.ndarray:
    """
    Draw sample covariances of T i.i.d. CN(0, R) snapshots.

    For T >= M the complex Bartlett decomposition is used: W = B B^H with B
    lower triangular, B_ii^2 ~ Gamma(T - i, 1) (0-based i) and B_ij ~ CN(0, 1)
    below the diagonal, so each draw costs O(M^3) instead of O(M^2 T).

    Returns:
        replicates x M x M complex array.
    """
    R = R.matrix if isinstance(R, HermitianCovariance) else np.asarray(R, dtype=complex)
    M = R.shape[0]
    if sample_size < 1 or replicates < 1:
        raise DomainError('Sample size and replicate count must be positive.')

    L = scipy.linalg.cholesky(R, lower=True)

    if sample_size < M:
        z = np.sqrt(0.5) * (
            rng.standard_normal((replicates, M, sample_size)) + 1j * rng.standard_normal((replicates, M, sample_size))
        )
        x = L @ z
        return x @ np.conj(np.swapaxes(x, 1, 2)) / sample_size

    B = np.zeros((replicates, M, M), dtype=complex)
    rows, cols = np.tril_indices(M, -1)
    B[:, rows, cols] = np.sqrt(0.5) * (
        rng.standard_normal((replicates, rows.size)) + 1j * rng.standard_normal((replicates, rows.size))
    )
    diagonal = np.arange(M)
    B[:, diagonal, diagonal] = np.sqrt(rng.gamma(shape=sample_size - diagonal, size=(replicates, M)))

    LB = L @ B
    return LB @ np.conj(np.swapaxes(LB, 1, 2)) / sample_size
