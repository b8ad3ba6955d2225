"""
Undoing estimated sensor offsets.
"""
from __future__ import annotations

import numpy as np

from .exceptions import DomainError
from .scenario import SnapshotMatrix


def apply_calibration(snapshots: SnapshotMatrix, estimate) -> SnapshotMatrix:
    """
    Calibrated snapshots r_hat[t] = Psi_hat^-1 Phi_hat^* r[t].

    estimate is anything with length-M psi_hat and phi_hat arrays, usually a
    CalibrationEstimate or an OffsetVector-backed oracle estimate.

    Raises:
        DomainError: If a gain estimate is not positive or the sizes disagree.
    """
    psi_hat = np.asarray(estimate.psi_hat, dtype=float)
    phi_hat = np.asarray(estimate.phi_hat, dtype=float)

    if psi_hat.shape != (snapshots.num_sensors,) or phi_hat.shape != psi_hat.shape:
        raise DomainError(
            f'Estimate covers {psi_hat.size} sensors, snapshots have {snapshots.num_sensors}.'
        )
    if np.any(~np.isfinite(psi_hat)) or np.any(psi_hat <= 0):
        raise DomainError('Gain estimates must be positive to undo the offsets.')

    correction = np.exp(-1j * phi_hat) / psi_hat
    return SnapshotMatrix(
        correction[:, None] * snapshots.data,
        scenario=snapshots.scenario,
        model=f'{snapshots.model}/calibrated',
    )
