"""
Ordinary least squares on same-diagonal differences.

Entries on one diagonal of a Toeplitz matrix are equal, so for two entries of
the same lower diagonal

    mu_ij - mu_kl = psi~_i + psi~_j - psi~_k - psi~_l

and for two entries of the same upper diagonal

    nu_ij - nu_kl = phi_i - phi_j - phi_k + phi_l.

Gains and phases are solved separately with unweighted LS over all such
pairs; rho and iota are the diagonal means of the residuals. The estimate is
linear in y, theta_hat = G y, so its covariance is G Lambda G^T.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations

import numpy as np

from array_model.exceptions import DomainError, IdentifiabilityError
from covariance_lab.covariance import HermitianCovariance
from covariance_lab.system import build_design_matrix, correlation_system

from .estimates import CalibrationEstimate, CalibrationMethod
from .statistics import noise_covariance_gaussian


def _pair_equations(diagonals, coefficients, num_rows):
    """Difference operator and design over every pair of rows sharing a diagonal."""
    selectors, design = [], []
    for rows in diagonals:
        for p, q in combinations(rows, 2):
            selector = np.zeros(num_rows)
            selector[p], selector[q] = 1.0, -1.0
            selectors.append(selector)
            design.append(coefficients[p] - coefficients[q])
    return np.array(selectors), np.array(design)


def _solve_map(selectors, design, unknowns, label):
    if design.size == 0 or np.linalg.matrix_rank(design[:, unknowns]) < len(unknowns):
        raise IdentifiabilityError(f'The same-diagonal {label} equations do not determine every {label} offset.')
    return np.linalg.pinv(design[:, unknowns]) @ selectors


@lru_cache(maxsize=None)
def ls_map(M: int, reduced: bool = False) -> np.ndarray:
    """
    The linear map G from measurements to theta_hat, rows in theta_layout order.

    With reduced=True the main diagonal is skipped and rho_1 is not estimated.
    """
    system = build_design_matrix(M, reduced)
    I, J, is_mu = system.rows_i, system.rows_j, system.is_mu
    L = system.num_rows
    rows = np.arange(L)
    offset = I - J

    lower = [rows[is_mu & (offset == d)] for d in range(0 if not reduced else 1, M)]
    upper = [rows[~is_mu & (-offset == d)] for d in range(1, M)]

    gain_coefficients = np.zeros((L, M))
    np.add.at(gain_coefficients, (rows[is_mu], I[is_mu]), 1.0)
    np.add.at(gain_coefficients, (rows[is_mu], J[is_mu]), 1.0)
    phase_coefficients = np.zeros((L, M))
    phase_coefficients[rows[~is_mu], I[~is_mu]] = 1.0
    phase_coefficients[rows[~is_mu], J[~is_mu]] = -1.0

    gain_map = np.zeros((M, L))
    selectors, design = _pair_equations(lower, gain_coefficients, L)
    gain_map[1:] = _solve_map(selectors, design, list(range(1, M)), 'gain')

    phase_map = np.zeros((M, L))
    selectors, design = _pair_equations(upper, phase_coefficients, L)
    phase_map[2:] = _solve_map(selectors, design, list(range(2, M)), 'phase')

    residual_gain = np.eye(L) - gain_coefficients @ gain_map
    residual_phase = np.eye(L) - phase_coefficients @ phase_map

    named = {}
    for m in range(2, M + 1):
        named[f'psi_{m}'] = gain_map[m - 1]
    for m in range(3, M + 1):
        named[f'phi_{m}'] = phase_map[m - 1]
    for rows_on_diagonal in lower:
        d = int(offset[rows_on_diagonal[0]])
        named[f'rho_{d + 1}'] = residual_gain[rows_on_diagonal].mean(axis=0)
    for rows_on_diagonal in upper:
        d = int(-offset[rows_on_diagonal[0]])
        named[f'iota_{d + 1}'] = residual_phase[rows_on_diagonal].mean(axis=0)

    G = np.array([named[name] for name in system.theta_layout])
    G.setflags(write=False)
    return G


def ls_baseline(R_hat: HermitianCovariance, reduced: bool = False, sampling_covariance=None) -> CalibrationEstimate:
    """
    Unweighted LS gains and phases from same-diagonal differences.

    No mean correction is applied. The reported covariance uses the Gaussian
    plug-in noise covariance built from R_hat.

    Raises:
        MeasurementError: If the log-domain measurements cannot be formed.
    """
    if R_hat.sample_size is None:
        raise DomainError('The LS covariance needs the sample size of R_hat.')

    system = correlation_system(R_hat, reduced)
    G = ls_map(R_hat.num_sensors, reduced)
    stats = noise_covariance_gaussian(R_hat, R_hat.sample_size, reduced, sampling_covariance=sampling_covariance)

    return CalibrationEstimate.from_theta(
        G @ system.y, system.theta_layout, R_hat.num_sensors,
        G @ stats.covariance @ G.T, CalibrationMethod.LS,
        sample_size=R_hat.sample_size,
    )
