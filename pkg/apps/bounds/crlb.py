"""
Cramer-Rao bounds on the gain and phase offsets.

The asymptotic MSE matrix of the optimally weighted estimate,
(H^T Lambda^-1 H)^-1, evaluated with Lambda from the true covariance, is
partitioned by parameter family. Gains are bounded through the Jacobian of
psi = exp(psi~), phases directly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from array_model.exceptions import DomainError, IdentifiabilityError
from array_model.scenario import ScenarioConfig
from covariance_lab.covariance import CovarianceKind, HermitianCovariance, analytic_covariance
from covariance_lab.system import CorrelationSystem, build_design_matrix
from owls_engine.statistics import NoiseStatistics, noise_covariance_gaussian

FAMILIES = ('psi', 'phi', 'rho', 'iota')


@dataclass(frozen=True, eq=False)
class CrlbReport:
    """
    Bound matrix in theta_layout order.

    gain_bounds covers psi_2..psi_M and phase_bounds phi_3..phi_M; both are
    None until filled by crlb_report or crlb_gains/crlb_phases.
    """
    full_matrix: np.ndarray
    theta_layout: tuple
    gain_bounds: np.ndarray | None = None
    phase_bounds: np.ndarray | None = None
    sample_size: int | None = None

    def indices(self, family: str) -> np.ndarray:
        if family not in FAMILIES:
            raise DomainError(f"Unknown parameter family '{family}'.")
        return np.array([k for k, name in enumerate(self.theta_layout) if name.split('_')[0] == family], dtype=int)

    def block(self, row_family: str, column_family: str) -> np.ndarray:
        """One labeled partition, e.g. block('psi', 'phi') is CR_psi~phi."""
        return self.full_matrix[np.ix_(self.indices(row_family), self.indices(column_family))]

    def reassemble(self) -> np.ndarray:
        """The full matrix rebuilt from its labeled blocks."""
        present = [family for family in FAMILIES if self.indices(family).size]
        return np.block([[self.block(r, c) for c in present] for r in present])

    def parameter_bounds(self) -> dict:
        """name -> bound for every identifiable gain and phase."""
        bounds = {}
        if self.gain_bounds is not None:
            bounds.update({f'psi_{m}': float(v) for m, v in enumerate(self.gain_bounds, start=2)})
        if self.phase_bounds is not None:
            bounds.update({f'phi_{m}': float(v) for m, v in enumerate(self.phase_bounds, start=3)})
        return bounds


def crlb_blocks(H, stats: NoiseStatistics, theta_layout=None) -> CrlbReport:
    """
    (H^T Lambda^-1 H)^-1 for Lambda built from the true covariance.

    H may be a CorrelationSystem, which also supplies the layout.

    Raises:
        IdentifiabilityError: If the weighted normal matrix is singular.
        DomainError: If Lambda is not positive definite.
    """
    if isinstance(H, CorrelationSystem):
        theta_layout = H.theta_layout if theta_layout is None else theta_layout
        H = H.H
    H = np.asarray(H, dtype=float)
    if theta_layout is None:
        raise DomainError('A theta layout is needed to partition the bound.')

    try:
        weight = scipy.linalg.cho_factor(stats.covariance, lower=True)
    except np.linalg.LinAlgError as exc:
        raise DomainError('Lambda must be positive definite for a bound.') from exc

    normal = H.T @ scipy.linalg.cho_solve(weight, H)
    try:
        normal_factor = scipy.linalg.cho_factor(normal, lower=True)
    except np.linalg.LinAlgError as exc:
        raise IdentifiabilityError('H^T Lambda^-1 H is singular.') from exc

    full = scipy.linalg.cho_solve(normal_factor, np.eye(H.shape[1]))
    full = 0.5 * (full + full.T)
    full.setflags(write=False)
    return CrlbReport(full, tuple(theta_layout), sample_size=stats.sample_size)


def crlb_gains(report: CrlbReport, psi) -> np.ndarray:
    """psi_n^2 (CR_psi~)_nn for n = 2..M."""
    psi = np.asarray(psi, dtype=float)
    return psi[1:] ** 2 * np.diag(report.block('psi', 'psi'))


def crlb_phases(report: CrlbReport) -> np.ndarray:
    """(CR_phi)_mm for m = 3..M, in radians^2."""
    return np.diag(report.block('phi', 'phi')).copy()


def crlb_report(scenario: ScenarioConfig, T: int | None = None, reduced: bool = False, plug_in=None) -> CrlbReport:
    """
    Bound for a scenario at sample size T, with gain and phase bounds filled.

    By default Lambda comes from the analytic covariance; plug_in replaces it
    with an estimate for diagnostics. With internal noise on the full system
    the linearized matrix is Sigma - sigma_w2 I and Sigma governs the errors.
    """
    T = scenario.sample_size if T is None else int(T)
    sigma = analytic_covariance(scenario) if plug_in is None else plug_in
    if not isinstance(sigma, HermitianCovariance):
        sigma = HermitianCovariance(sigma, CovarianceKind.ANALYTIC, T)

    R, sampling = sigma, None
    if scenario.sigma_w2 > 0 and not reduced:
        R = HermitianCovariance(sigma.matrix - scenario.sigma_w2 * np.eye(scenario.num_sensors), sigma.kind, T)
        sampling = sigma

    stats = noise_covariance_gaussian(R, T, reduced, sampling_covariance=sampling)
    report = crlb_blocks(build_design_matrix(scenario.num_sensors, reduced), stats)
    return CrlbReport(
        report.full_matrix,
        report.theta_layout,
        gain_bounds=crlb_gains(report, scenario.offsets.gains),
        phase_bounds=crlb_phases(report),
        sample_size=T,
    )
