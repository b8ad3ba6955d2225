"""
Optimally weighted least squares on the correlation measurements.

    theta_hat = (H^T Lambda^-1 H)^-1 H^T Lambda^-1 (y - eta)

Lambda is factorized with a Cholesky decomposition; no explicit inverse of
the weight matrix is ever formed.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import replace

import numpy as np
import scipy.linalg

from array_model.exceptions import (
    CalibrationWarning,
    DomainError,
    IdentifiabilityError,
    SingularWeightError,
)
from array_model.scenario import SnapshotMatrix
from covariance_lab.covariance import ds_shift, ml_ds_shift, sample_covariance
from covariance_lab.system import CorrelationSystem, build_design_matrix, correlation_system, true_theta

from .baselines import ls_baseline
from .cumulants import estimate_cumulants
from .estimates import CalibrationEstimate, CalibrationMethod
from .statistics import NoiseStatistics, noise_covariance_gaussian, noise_covariance_qml

logger = logging.getLogger(__name__)

MAX_CONDITION = 1e12
JITTER_SCALE = 1e-12


def factorize_weight(covariance: np.ndarray):
    """
    Cholesky factor of Lambda, retried once with a small diagonal jitter.

    Returns:
        (cho_factor result, jitter_applied)

    Raises:
        SingularWeightError: If Lambda is not positive definite after the
            jitter or its condition number exceeds MAX_CONDITION.
    """
    jitter_applied = False
    try:
        factor = scipy.linalg.cho_factor(covariance, lower=True)
    except np.linalg.LinAlgError:
        jitter = JITTER_SCALE * float(np.mean(np.diag(covariance)))
        logger.debug('Weight matrix not positive definite, retrying with jitter %.3e', jitter)
        try:
            factor = scipy.linalg.cho_factor(covariance + jitter * np.eye(covariance.shape[0]), lower=True)
        except np.linalg.LinAlgError as exc:
            raise SingularWeightError('The weight matrix is not positive definite.') from exc
        jitter_applied = True

    # cond(Lambda) = cond(L)^2
    diagonal = np.abs(np.diag(factor[0]))
    if diagonal.min() == 0 or (diagonal.max() / diagonal.min()) ** 2 > MAX_CONDITION:
        eigenvalues = np.linalg.eigvalsh(covariance)
        if eigenvalues[0] <= 0 or eigenvalues[-1] / eigenvalues[0] > MAX_CONDITION:
            raise SingularWeightError(
                f'The weight matrix is numerically singular (condition estimate above {MAX_CONDITION:.0e}).'
            )
    return factor, jitter_applied


def owls_solve(system: CorrelationSystem, stats: NoiseStatistics, method=CalibrationMethod.ML_OWLS) -> CalibrationEstimate:
    """
    Weighted least squares with weight Lambda^-1 and mean correction eta.

    Raises:
        DomainError: If the system carries no measurements or the statistics
            do not match its rows.
        SingularWeightError: If Lambda is numerically singular.
        IdentifiabilityError: If H^T Lambda^-1 H is singular.
    """
    if system.y is None:
        raise DomainError('The measurement system has no measurements attached.')
    if stats.covariance.shape != (system.num_rows, system.num_rows) or stats.reduced != system.reduced:
        raise DomainError('Noise statistics do not match the measurement system.')

    messages = []
    M, T = system.num_sensors, stats.sample_size
    if T <= M * M:
        message = f'T = {T} does not exceed M^2 = {M * M}; the weight estimate may be unreliable.'
        warnings.warn(message, CalibrationWarning, stacklevel=2)
        messages.append(message)

    factor, jitter_applied = factorize_weight(stats.covariance)
    H = system.H
    weighted_H = scipy.linalg.cho_solve(factor, H)
    normal = H.T @ weighted_H
    rhs = weighted_H.T @ (system.y - stats.eta)

    try:
        normal_factor = scipy.linalg.cho_factor(normal, lower=True)
    except np.linalg.LinAlgError as exc:
        raise IdentifiabilityError('H^T Lambda^-1 H is singular; the parameters are not identifiable.') from exc

    theta_hat = scipy.linalg.cho_solve(normal_factor, rhs)
    est_covariance = scipy.linalg.cho_solve(normal_factor, np.eye(H.shape[1]))

    return CalibrationEstimate.from_theta(
        theta_hat, system.theta_layout, M, est_covariance, method,
        sample_size=T,
        warnings=tuple(messages),
        jitter_applied=jitter_applied,
        properness_violated=stats.properness_violated,
    )


def separated_wls(system: CorrelationSystem, stats: NoiseStatistics) -> CalibrationEstimate:
    """WLS that ignores the correlation between the gain and phase measurements."""
    return owls_solve(system, stats.block_diagonal(), method=CalibrationMethod.SEP_WLS)


def reduced_owls(system_reduced: CorrelationSystem, stats_reduced: NoiseStatistics) -> CalibrationEstimate:
    """
    OWLS on the off-diagonal measurements only; consistent under unknown
    internal noise, though not efficient.
    """
    if not system_reduced.reduced or not stats_reduced.reduced:
        raise DomainError('reduced_owls needs the reduced measurement system and statistics.')
    return owls_solve(system_reduced, stats_reduced, method=CalibrationMethod.R_ML_OWLS)


def oracle_estimate(snapshots: SnapshotMatrix) -> CalibrationEstimate:
    """The ground-truth offsets of the scenario that generated the snapshots."""
    scenario = snapshots.scenario
    if scenario is None:
        raise DomainError('Oracle calibration needs snapshots that carry their scenario.')
    layout = build_design_matrix(scenario.num_sensors).theta_layout
    theta = true_theta(scenario)
    return CalibrationEstimate.from_theta(
        theta, layout, scenario.num_sensors, np.zeros((theta.size, theta.size)), CalibrationMethod.ORACLE,
        sample_size=snapshots.sample_size,
    )


def calibrate(snapshots: SnapshotMatrix, method, *, sigma_w2=None, num_sources=None, reduced=False) -> CalibrationEstimate:
    """
    Blind calibration from snapshots, end to end.

    Case dispatch for the extended model:
    - sigma_w2 known: the diagonally shifted estimate Sigma_hat - sigma_w2 I
    - sigma_w2 unknown, num_sources given: the ML-DS estimate
    - R-ML-OWLS: the reduced system on Sigma_hat, whatever the noise model
    Without either argument the pure model is assumed and Sigma_hat = R_hat.

    reduced=True asks LS to skip the main diagonal as well.

    Raises:
        MeasurementError: If the log-domain measurements cannot be formed.
        SingularWeightError: If the weight matrix is numerically singular.
    """
    method = CalibrationMethod(method)
    if method == CalibrationMethod.ORACLE:
        return oracle_estimate(snapshots)

    sigma_hat = sample_covariance(snapshots)
    T = sigma_hat.sample_size

    if method == CalibrationMethod.R_ML_OWLS:
        system = correlation_system(sigma_hat, reduced=True)
        stats = noise_covariance_gaussian(sigma_hat, T, reduced=True)
        return reduced_owls(system, stats)

    sigma_w2_hat = None
    if sigma_w2 is not None:
        R_hat = ds_shift(sigma_hat, sigma_w2)
    elif num_sources is not None:
        R_hat, sigma_w2_hat = ml_ds_shift(sigma_hat, num_sources)
    else:
        R_hat = sigma_hat
    sampling = sigma_hat if R_hat is not sigma_hat else None

    if method == CalibrationMethod.LS:
        return ls_baseline(R_hat, reduced=reduced, sampling_covariance=sampling)

    system = correlation_system(R_hat)
    if method == CalibrationMethod.QML_OWLS:
        stats = noise_covariance_qml(R_hat, estimate_cumulants(snapshots), T, sampling_covariance=sampling)
        estimate = owls_solve(system, stats, method=method)
    else:
        stats = noise_covariance_gaussian(R_hat, T, sampling_covariance=sampling)
        estimate = separated_wls(system, stats) if method == CalibrationMethod.SEP_WLS else owls_solve(system, stats)

    if sigma_w2_hat is not None:
        estimate = replace(estimate, sigma_w2_hat=sigma_w2_hat)
    return estimate
