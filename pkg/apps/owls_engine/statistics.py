"""
First and second moments of the transformed measurement noise xi.

To first order in the relative error delta_ij = e_ij / R_ij of each
covariance entry, mu-rows carry Re(delta) and nu-rows carry Im(delta). With

    a = E[delta_p delta_q^*],   b = E[delta_p delta_q]

the second-moment blocks are

    mu/mu: 0.5 Re(a + b)    nu/nu: 0.5 Re(a - b)
    mu/nu: 0.5 Im(b - a)    nu/mu: 0.5 Im(b + a)

and for T snapshots of proper data

    T E[e_ij e_kl^*] = R_ik R_jl^* + kappa[i, j, l, k]
    T E[e_ij e_kl]   = R_il R_jk^* + kappa[i, j, k, l]

The Gaussian variant has kappa = 0. The mean is -1/(2T) on mu-rows and 0 on
nu-rows, and Lambda = E[xi xi^T] - eta eta^T.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from django.db import models

from array_model.exceptions import DomainError
from covariance_lab.covariance import HermitianCovariance
from covariance_lab.system import build_design_matrix

from .cumulants import CumulantTable


class NoiseVariant(models.TextChoices):
    GAUSSIAN_ML = 'gaussian-ml', 'Gaussian (ML)'
    QML = 'qml', 'Cumulant corrected (QML)'


@dataclass(frozen=True, eq=False)
class NoiseStatistics:
    """Mean eta and covariance Lambda of xi, in the row order of the measurement system."""
    eta: np.ndarray
    covariance: np.ndarray
    variant: NoiseVariant = NoiseVariant.GAUSSIAN_ML
    reduced: bool = False
    sample_size: int = 1
    properness_violated: bool = False
    is_mu: np.ndarray | None = None

    def __post_init__(self):
        covariance = np.array(self.covariance, dtype=float)
        covariance = 0.5 * (covariance + covariance.T)
        covariance.setflags(write=False)
        eta = np.array(self.eta, dtype=float)
        eta.setflags(write=False)
        object.__setattr__(self, 'covariance', covariance)
        object.__setattr__(self, 'eta', eta)
        object.__setattr__(self, 'variant', NoiseVariant(self.variant))

    @property
    def lambda_(self) -> np.ndarray:
        return self.covariance

    def is_psd(self, relative_tolerance: float = 1e-10) -> bool:
        minimum = np.linalg.eigvalsh(self.covariance)[0]
        return bool(minimum >= -relative_tolerance * np.trace(self.covariance))

    def scaled(self, factor: float) -> NoiseStatistics:
        return replace(self, covariance=factor * self.covariance)

    def block_diagonal(self) -> NoiseStatistics:
        """Lambda with the mu/nu cross blocks zeroed."""
        if self.is_mu is None:
            raise DomainError('Row parts are unknown; cannot separate the mu and nu blocks.')
        same_part = self.is_mu[:, None] == self.is_mu[None, :]
        return replace(self, covariance=np.where(same_part, self.covariance, 0.0))


def noise_mean(M: int, T: int, reduced: bool = False) -> np.ndarray:
    """eta: -1/(2T) on every mu-row, 0 on every nu-row."""
    if T < 1:
        raise DomainError('Sample size must be positive.')
    system = build_design_matrix(M, reduced)
    return np.where(system.is_mu, -1.0 / (2.0 * T), 0.0)


def _as_matrix(covariance) -> np.ndarray:
    if isinstance(covariance, HermitianCovariance):
        return covariance.matrix
    return np.asarray(covariance, dtype=complex)


def _noise_statistics(R, T, reduced, variant, kappa=None, sampling_covariance=None, properness_violated=False):
    if T < 1:
        raise DomainError('Sample size must be positive.')
    R = _as_matrix(R)
    S = R if sampling_covariance is None else _as_matrix(sampling_covariance)
    M = R.shape[0]

    system = build_design_matrix(M, reduced)
    I, J, is_mu = system.rows_i, system.rows_j, system.is_mu

    entries = R[I, J]
    if np.any(entries == 0):
        raise DomainError('Zero covariance entry; the relative error is undefined.')

    # p = (i, j) runs down the rows, q = (k, l) across the columns
    i, j = I[:, None], J[:, None]
    k, l = I[None, :], J[None, :]
    conj_numerator = S[i, k] * np.conj(S[j, l])
    numerator = S[i, l] * np.conj(S[j, k])
    if kappa is not None:
        conj_numerator = conj_numerator + kappa[i, j, l, k]
        numerator = numerator + kappa[i, j, k, l]

    a = conj_numerator / (entries[:, None] * np.conj(entries)[None, :]) / T
    b = numerator / (entries[:, None] * entries[None, :]) / T

    mu_p, mu_q = is_mu[:, None], is_mu[None, :]
    second_moment = np.where(
        mu_p & mu_q, 0.5 * np.real(a + b),
        np.where(
            ~mu_p & ~mu_q, 0.5 * np.real(a - b),
            np.where(mu_p, 0.5 * np.imag(b - a), 0.5 * np.imag(b + a)),
        ),
    )

    eta = noise_mean(M, T, reduced)
    return NoiseStatistics(
        eta=eta,
        covariance=second_moment - np.outer(eta, eta),
        variant=variant,
        reduced=reduced,
        sample_size=T,
        properness_violated=properness_violated,
        is_mu=is_mu,
    )


def noise_covariance_gaussian(R, T: int, reduced: bool = False, sampling_covariance=None) -> NoiseStatistics:
    """
    Noise statistics for circular Gaussian data.

    R is the covariance whose entries are linearized (usually the plug-in
    estimate). sampling_covariance is the covariance of the snapshots the
    estimate was formed from; it differs from R only for diagonally shifted
    estimates, whose errors are those of the raw sample covariance.

    Raises:
        DomainError: If a used entry of R is zero.
    """
    return _noise_statistics(R, T, reduced, NoiseVariant.GAUSSIAN_ML, sampling_covariance=sampling_covariance)


def noise_covariance_qml(R, kappa: CumulantTable, T: int, reduced: bool = False, sampling_covariance=None) -> NoiseStatistics:
    """
    Noise statistics with fourth-order cumulant corrections.

    With kappa identically zero the result equals noise_covariance_gaussian.

    Raises:
        DomainError: If a used entry of R is zero or the cumulant table does
            not match R.
    """
    table = kappa.kappa if isinstance(kappa, CumulantTable) else np.asarray(kappa, dtype=complex)
    M = _as_matrix(R).shape[0]
    if table.shape != (M,) * 4:
        raise DomainError(f'Cumulant table has shape {table.shape}, expected {(M,) * 4}.')
    return _noise_statistics(
        R, T, reduced, NoiseVariant.QML,
        kappa=table,
        sampling_covariance=sampling_covariance,
        properness_violated=getattr(kappa, 'properness_violated', False),
    )
