"""
Uniform linear array geometry, sensor offsets and the nominal array manifold.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import CalibrationWarning, ConfigurationError, DomainError


@dataclass(frozen=True)
class ArrayGeometry:
    """
    Uniform linear array with M sensors and spacing expressed in wavelengths.

    The steering phase between adjacent sensors for azimuth alpha is
    wavenumber_spacing_product * cos(alpha).
    """
    num_sensors: int
    spacing_over_wavelength: float = 0.5

    def __post_init__(self):
        errors = {}
        if int(self.num_sensors) != self.num_sensors or self.num_sensors < 2:
            errors['num_sensors'] = 'An array needs at least 2 sensors.'
        if not self.spacing_over_wavelength > 0:
            errors['spacing_over_wavelength'] = 'Sensor spacing must be positive.'
        if errors:
            raise ConfigurationError('Invalid array geometry.', errors)

    @property
    def wavenumber_spacing_product(self) -> float:
        return 2.0 * np.pi * self.spacing_over_wavelength


@dataclass(frozen=True, eq=False)
class OffsetVector:
    """Per-sensor gains (positive) and phases (radians)."""
    gains: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=float)
        phases = np.asarray(self.phases, dtype=float)
        object.__setattr__(self, 'gains', gains)
        object.__setattr__(self, 'phases', phases)

        errors = {}
        if gains.ndim != 1 or phases.shape != gains.shape:
            errors['phases'] = 'Gains and phases must be vectors of the same length.'
        elif np.any(gains <= 0):
            errors['gains'] = 'All sensor gains must be positive.'
        elif np.any(np.abs(phases) >= np.pi):
            errors['phases'] = 'All phase offsets must lie strictly inside (-pi, pi).'
        if errors:
            raise ConfigurationError('Invalid sensor offsets.', errors)

    @classmethod
    def identity(cls, num_sensors: int) -> OffsetVector:
        return cls(np.ones(num_sensors), np.zeros(num_sensors))

    @property
    def num_sensors(self) -> int:
        return self.gains.shape[0]

    def follows_reference_convention(self, atol: float = 1e-12) -> bool:
        """True when psi_1 = 1 and phi_1 = phi_2 = 0."""
        return (
            abs(self.gains[0] - 1.0) <= atol
            and abs(self.phases[0]) <= atol
            and (self.num_sensors < 2 or abs(self.phases[1]) <= atol)
        )

    def as_diagonal(self) -> np.ndarray:
        """The complex per-sensor response psi_m * exp(j phi_m)."""
        return self.gains * np.exp(1j * self.phases)


def steering_vector(alpha: float, geometry: ArrayGeometry) -> np.ndarray:
    """a(alpha)_m = exp(j k gamma (m - 1) cos(alpha)) for m = 1..M."""
    m = np.arange(geometry.num_sensors)
    return np.exp(1j * geometry.wavenumber_spacing_product * m * np.cos(alpha))


def manifold_matrix(alphas, geometry: ArrayGeometry) -> np.ndarray:
    """
    Nominal M x N array manifold A(alpha), one steering vector per column.

    Raises:
        DomainError: If no azimuth is given.
    """
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    if alphas.size == 0:
        raise DomainError('At least one azimuth is required to build the manifold.')

    spatial = np.cos(alphas)
    if np.unique(np.round(spatial, 12)).size < spatial.size:
        warnings.warn(
            'Duplicate spatial frequencies among the azimuths; the manifold is rank deficient.',
            CalibrationWarning,
            stacklevel=2,
        )

    m = np.arange(geometry.num_sensors)[:, None]
    return np.exp(1j * geometry.wavenumber_spacing_product * m * spatial[None, :])
