"""
Brute-force check of the closed-form noise statistics.

Sample covariances of Gaussian snapshots are drawn directly from the complex
Wishart distribution, pushed through the log-domain measurements, and the
empirical mean and covariance of xi are compared with noise_mean and
noise_covariance_gaussian evaluated at the analytic covariance.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from array_model.scenario import ScenarioConfig
from covariance_lab.covariance import analytic_covariance, sample_wishart_covariances
from covariance_lab.system import build_design_matrix, correlation_system
from owls_engine.statistics import noise_covariance_gaussian

logger = logging.getLogger(__name__)

ORACLE_METHOD = 'GAUSSIAN-NOISE-STATS'
CHUNK_SIZE = 5000
# covariance entries below this multiple of 1/T are too small to compare relatively
SIGNIFICANT_ENTRY = 1e-3


@dataclass(frozen=True, eq=False)
class OracleReport:
    empirical_mean: np.ndarray
    empirical_covariance: np.ndarray
    eta: np.ndarray
    covariance: np.ndarray
    replicates: int
    invalid: int
    eta_max_rel_dev: float
    lambda_max_rel_dev: float
    lambda_diag_max_rel_dev: float


def batch_measurement_noise(matrices: np.ndarray, R, reduced: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """xi for a stack of sample covariances; rows with a zero entry are dropped."""
    system = build_design_matrix(R.num_sensors, reduced)
    reference = correlation_system(R, reduced).y

    entries = matrices[:, system.rows_i, system.rows_j]
    # symmetrize the diagonal the same way HermitianCovariance does
    diagonal = system.rows_i == system.rows_j
    entries[:, diagonal] = entries[:, diagonal].real

    usable = np.all(entries != 0, axis=1)
    with np.errstate(divide='ignore', invalid='ignore'):
        logs = np.log(entries[usable])
    xi = np.where(system.is_mu, logs.real, logs.imag) - reference
    return xi, usable


def noise_statistics_oracle(scenario: ScenarioConfig, sample_size: int, replicates: int, rng: np.random.Generator,
                            reduced: bool = False) -> OracleReport:
    """
    Empirical vs closed-form statistics of xi over many sample covariances.

    Mean deviations are relative to |eta| on the mu-rows; covariance
    deviations are relative over entries larger than 1e-3 / T.
    """
    R = analytic_covariance(scenario)
    L = build_design_matrix(scenario.num_sensors, reduced).num_rows

    total = np.zeros(L)
    outer = np.zeros((L, L))
    count = 0
    for start in range(0, replicates, CHUNK_SIZE):
        size = min(CHUNK_SIZE, replicates - start)
        matrices = sample_wishart_covariances(R, sample_size, size, rng)
        xi, usable = batch_measurement_noise(matrices, R, reduced)
        total += xi.sum(axis=0)
        outer += xi.T @ xi
        count += int(usable.sum())

    mean = total / count
    empirical = outer / count - np.outer(mean, mean)
    stats = noise_covariance_gaussian(R, sample_size, reduced)

    mu_rows = stats.is_mu
    eta_dev = float(np.max(np.abs(mean[mu_rows] - stats.eta[mu_rows]) / np.abs(stats.eta[mu_rows])))
    significant = np.abs(stats.covariance) > SIGNIFICANT_ENTRY / sample_size
    lambda_dev = float(np.max(
        np.abs(empirical[significant] - stats.covariance[significant]) / np.abs(stats.covariance[significant])
    ))
    diagonal = np.diag(stats.covariance)
    diag_dev = float(np.max(np.abs(np.diag(empirical) - diagonal) / diagonal))
    logger.info('Noise statistics oracle at T=%d: eta %.3f, Lambda %.3f max relative deviation',
                sample_size, eta_dev, lambda_dev)

    return OracleReport(
        empirical_mean=mean,
        empirical_covariance=empirical,
        eta=stats.eta,
        covariance=stats.covariance,
        replicates=replicates,
        invalid=replicates - count,
        eta_max_rel_dev=eta_dev,
        lambda_max_rel_dev=lambda_dev,
        lambda_diag_max_rel_dev=diag_dev,
    )
