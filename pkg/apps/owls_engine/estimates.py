"""
Calibration estimates and their CSV form.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from django.db import models


class CalibrationMethod(models.TextChoices):
    ML_OWLS = 'ML-OWLS', 'ML-based optimally weighted LS'
    QML_OWLS = 'QML-OWLS', 'Quasi-ML optimally weighted LS'
    R_ML_OWLS = 'R-ML-OWLS', 'Reduced ML-based optimally weighted LS'
    LS = 'LS', 'Ordinary LS on same-diagonal differences'
    SEP_WLS = 'SEP-WLS', 'WLS ignoring gain/phase cross correlations'
    ORACLE = 'ORACLE', 'Ground-truth offsets'


@dataclass(frozen=True, eq=False)
class CalibrationEstimate:
    """
    theta_hat in theta_layout order, with the gains and phases it implies.

    psi_hat[0] is always 1 and phi_hat[0] = phi_hat[1] = 0; every other entry
    comes from the psi_m / phi_m names in theta_layout.
    """
    theta_hat: np.ndarray
    psi_hat: np.ndarray
    phi_hat: np.ndarray
    est_covariance: np.ndarray
    method: CalibrationMethod
    theta_layout: tuple
    sample_size: int | None = None
    warnings: tuple = ()
    jitter_applied: bool = False
    properness_violated: bool = False
    sigma_w2_hat: float | None = None

    @classmethod
    def from_theta(cls, theta_hat, theta_layout, num_sensors, est_covariance, method, **metadata) -> CalibrationEstimate:
        """Extract gains and phases from theta_hat and reinsert the references."""
        theta_hat = np.asarray(theta_hat, dtype=float)
        log_gains = np.zeros(num_sensors)
        phases = np.zeros(num_sensors)
        for value, name in zip(theta_hat, theta_layout):
            family, index = name.split('_')
            if family == 'psi':
                log_gains[int(index) - 1] = value
            elif family == 'phi':
                phases[int(index) - 1] = value

        est_covariance = np.asarray(est_covariance, dtype=float)
        return cls(
            theta_hat=theta_hat,
            psi_hat=np.exp(log_gains),
            phi_hat=phases,
            est_covariance=0.5 * (est_covariance + est_covariance.T),
            method=CalibrationMethod(method),
            theta_layout=tuple(theta_layout),
            **metadata,
        )

    @property
    def num_sensors(self) -> int:
        return self.psi_hat.shape[0]

    def gain_errors(self, gains) -> np.ndarray:
        """psi_hat - psi for sensors 2..M."""
        return self.psi_hat[1:] - np.asarray(gains, dtype=float)[1:]

    def phase_errors(self, phases) -> np.ndarray:
        """phi_hat - phi (radians) for sensors 3..M."""
        return self.phi_hat[2:] - np.asarray(phases, dtype=float)[2:]

    def to_csv_row(self) -> list[str]:
        """method, M, T, psi_hat, phi_hat in degrees, flattened est_covariance."""
        values = (
            list(self.psi_hat)
            + list(np.rad2deg(self.phi_hat))
            + list(np.ravel(self.est_covariance))
        )
        sample_size = '' if self.sample_size is None else str(self.sample_size)
        return [self.method.value, str(self.num_sensors), sample_size] + [repr(float(v)) for v in values]


def write_estimates_csv(estimates, path) -> Path:
    path = Path(path)
    try:
        with path.open('w', newline='', encoding='utf-8') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            for estimate in estimates:
                writer.writerow(estimate.to_csv_row())
    except OSError as exc:
        raise OSError(f'Cannot write estimates to {path}: {exc}') from exc
    return path
