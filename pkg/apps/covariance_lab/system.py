"""
The real-valued linear "correlation measurements" system y = H theta + xi.

Taking the principal logarithm of every covariance entry turns the unknown
offsets into linear terms:

    Re log R_ij = psi~_i + psi~_j + rho_{i-j+1}      (lower triangle, mu-rows)
    Im log R_ij = phi_i - phi_j + iota_{j-i+1}       (strict upper triangle, nu-rows)

with psi~ = log psi and rho + j iota = log c, c_m = C_{1,m} the first row of
the Toeplitz covariance. The references psi~_1, phi_1, phi_2 and iota_1 are
fixed, which leaves K = 4M - 4 unknowns.

The reduced system keeps only the off-diagonal entries. rho_1 appears in the
diagonal rows alone, so it is dropped from the reduced layout as well and the
reduced system has 4M - 5 unknowns.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from array_model.exceptions import DomainError, MeasurementError
from array_model.scenario import ScenarioConfig

from .covariance import HermitianCovariance, toeplitz_covariance
from .vectorize import lvec_indices, uvec_indices

logger = logging.getLogger(__name__)

MU = 'mu'
NU = 'nu'

# principal phases this close to +-pi suggest a wrapped measurement
PHASE_WRAP_MARGIN = 0.1


@dataclass(frozen=True, eq=False)
class CorrelationSystem:
    """
    Stacked measurement system for an M-sensor array.

    rows_i, rows_j and is_mu describe every row (0-based sensor indices);
    mu-rows come first in lvec order, then nu-rows in uvec order. y is None
    until measurements are attached with with_measurements().
    """
    num_sensors: int
    H: np.ndarray
    rows_i: np.ndarray
    rows_j: np.ndarray
    is_mu: np.ndarray
    theta_layout: tuple
    reduced: bool = False
    y: np.ndarray | None = None
    phase_wrap_flagged: bool = False

    @property
    def num_rows(self) -> int:
        return self.H.shape[0]

    @property
    def num_parameters(self) -> int:
        return self.H.shape[1]

    @property
    def num_mu_rows(self) -> int:
        return int(np.count_nonzero(self.is_mu))

    @property
    def index_map(self) -> tuple:
        """(i, j, part) per row, 0-based."""
        return tuple(
            (int(i), int(j), MU if mu else NU)
            for i, j, mu in zip(self.rows_i, self.rows_j, self.is_mu)
        )

    def parameter_index(self, name: str) -> int:
        return self.theta_layout.index(name)

    def block_indices(self, prefix: str) -> np.ndarray:
        """Column indices of one parameter family: 'psi', 'phi', 'rho' or 'iota'."""
        return np.array([k for k, name in enumerate(self.theta_layout) if name.split('_')[0] == prefix], dtype=int)

    def with_measurements(self, y, phase_wrap_flagged: bool = False) -> CorrelationSystem:
        y = np.asarray(y, dtype=float)
        if y.shape != (self.num_rows,):
            raise DomainError(f'Expected {self.num_rows} measurements, got shape {y.shape}.')
        y.setflags(write=False)
        return replace(self, y=y, phase_wrap_flagged=phase_wrap_flagged)


def full_layout(M: int) -> tuple:
    return (
        tuple(f'psi_{m}' for m in range(1, M + 1))
        + tuple(f'phi_{m}' for m in range(1, M + 1))
        + tuple(f'rho_{m}' for m in range(1, M + 1))
        + tuple(f'iota_{m}' for m in range(1, M + 1))
    )


def deleted_columns(M: int, reduced: bool) -> tuple:
    """Reference columns removed from the 4M-column layout."""
    columns = (0, M, M + 1, 3 * M)
    if reduced:
        columns += (2 * M,)
    return tuple(sorted(columns))


def row_indices(M: int, reduced: bool) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    lower_i, lower_j = lvec_indices(M)
    if reduced:
        off_diagonal = lower_i != lower_j
        lower_i, lower_j = lower_i[off_diagonal], lower_j[off_diagonal]
    upper_i, upper_j = uvec_indices(M)

    rows_i = np.concatenate([lower_i, upper_i])
    rows_j = np.concatenate([lower_j, upper_j])
    is_mu = np.concatenate([np.ones(lower_i.size, dtype=bool), np.zeros(upper_i.size, dtype=bool)])
    return rows_i, rows_j, is_mu


@lru_cache(maxsize=None)
def build_design_matrix(M: int, reduced: bool = False) -> CorrelationSystem:
    """
    Design matrix H and row/parameter layout for M sensors.

    The result is cached per (M, reduced) and its arrays are read-only.

    Raises:
        DomainError: If M < 2, or M < 4 for the reduced system.
    """
    if M < 2:
        raise DomainError('The measurement system needs at least 2 sensors.')
    if reduced and M < 4:
        raise DomainError('The reduced measurement system needs at least 4 sensors.')

    rows_i, rows_j, is_mu = row_indices(M, reduced)
    full = np.zeros((rows_i.size, 4 * M))
    rows = np.arange(rows_i.size)

    mu, nu = rows[is_mu], rows[~is_mu]
    # psi~_i + psi~_j, which doubles on the diagonal
    np.add.at(full, (mu, rows_i[mu]), 1.0)
    np.add.at(full, (mu, rows_j[mu]), 1.0)
    full[mu, 2 * M + rows_i[mu] - rows_j[mu]] = 1.0

    full[nu, M + rows_i[nu]] = 1.0
    full[nu, M + rows_j[nu]] = -1.0
    full[nu, 3 * M + rows_j[nu] - rows_i[nu]] = 1.0

    dropped = deleted_columns(M, reduced)
    keep = [k for k in range(4 * M) if k not in dropped]
    H = full[:, keep]
    names = full_layout(M)
    layout = tuple(names[k] for k in keep)

    for array in (H, rows_i, rows_j, is_mu):
        array.setflags(write=False)
    logger.debug('Built %s design matrix for M=%d: %d x %d', 'reduced' if reduced else 'full', M, *H.shape)
    return CorrelationSystem(M, H, rows_i, rows_j, is_mu, layout, reduced)


def _log_entries(R_hat: HermitianCovariance, system: CorrelationSystem) -> np.ndarray:
    R = R_hat.matrix
    if R_hat.num_sensors != system.num_sensors:
        raise DomainError(f'Covariance is {R_hat.num_sensors} x {R_hat.num_sensors}, system expects M={system.num_sensors}.')

    if not system.reduced:
        diagonal = np.real(np.diag(R))
        if np.any(diagonal <= 0):
            raise MeasurementError(
                f'Non-positive diagonal entries {np.flatnonzero(diagonal <= 0).tolist()} after the diagonal shift.'
            )

    entries = R[system.rows_i, system.rows_j]
    if np.any(entries == 0):
        raise MeasurementError('Zero covariance entry; its logarithm is undefined.')

    logs = np.log(entries)
    return np.where(system.is_mu, logs.real, logs.imag)


def correlation_system(R_hat: HermitianCovariance, reduced: bool = False) -> CorrelationSystem:
    """
    Attach log-domain measurements to the cached design matrix.

    Raises:
        MeasurementError: If a used entry is zero or a diagonal entry is not
            positive.
    """
    system = build_design_matrix(R_hat.num_sensors, reduced)
    y = _log_entries(R_hat, system)
    flagged = bool(np.any(np.abs(y[~system.is_mu]) > np.pi - PHASE_WRAP_MARGIN))
    if flagged:
        logger.debug('Phase measurement within %.2f rad of +-pi, possible wrap', PHASE_WRAP_MARGIN)
    return system.with_measurements(y, phase_wrap_flagged=flagged)


def build_measurements(R_hat: HermitianCovariance) -> np.ndarray:
    """y = [lvec(Re log R_hat); uvec(Im log R_hat)], length M^2."""
    return correlation_system(R_hat, reduced=False).y


def build_reduced_measurements(sigma_hat: HermitianCovariance) -> np.ndarray:
    """Off-diagonal measurements only, length M(M - 1); the diagonal is never read."""
    return correlation_system(sigma_hat, reduced=True).y


def measurement_noise(R_hat: HermitianCovariance, R: HermitianCovariance, reduced: bool = False) -> np.ndarray:
    """xi = y(R_hat) - y(R), the transformed estimation error."""
    return correlation_system(R_hat, reduced).y - correlation_system(R, reduced).y


def true_theta(scenario: ScenarioConfig, reduced: bool = False) -> np.ndarray:
    """Ground-truth parameter vector in the layout of build_design_matrix."""
    M = scenario.num_sensors
    c = toeplitz_covariance(scenario).matrix[0, :]
    log_c = np.log(c)
    full = np.concatenate([
        np.log(scenario.offsets.gains),
        scenario.offsets.phases,
        log_c.real,
        log_c.imag,
    ])
    keep = [k for k in range(4 * M) if k not in deleted_columns(M, reduced)]
    return full[keep]
