"""
MUSIC direction-of-arrival estimation for calibrated ULAs.

The pseudo-spectrum is P(alpha) = 1 / ||E_n^H a(alpha)||^2 with E_n spanning
the M - N smallest eigenvalues of the covariance. On a ULA alpha and -alpha
share cos(alpha), so estimates live in (0, pi) and are compared with the
ground truth in cos-space.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.signal

from array_model.calibration import apply_calibration
from array_model.exceptions import CalibrationWarning, DomainError
from array_model.geometry import ArrayGeometry, manifold_matrix
from array_model.scenario import SnapshotMatrix
from covariance_lab.covariance import HermitianCovariance, sample_covariance

logger = logging.getLogger(__name__)

GRID_START_DEG = 0.5
GRID_STOP_DEG = 179.5
GRID_STEP_DEG = 0.02
EIGEN_GAP_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class MusicSpectrum:
    grid: np.ndarray
    values: np.ndarray
    warnings: tuple = ()

    def pairs(self):
        """(grid angle, value) pairs."""
        return list(zip(self.grid, self.values))


@dataclass(frozen=True, eq=False)
class DoaEstimate:
    """
    Up to N refined peak angles in radians, ascending.

    detection_failed is set when the spectrum has fewer than N local maxima;
    angles then holds only the peaks that were found.
    """
    angles: np.ndarray
    spectrum: MusicSpectrum
    detection_failed: bool = False
    warnings: tuple = ()


def default_grid(step_deg: float = GRID_STEP_DEG) -> np.ndarray:
    """Uniform search grid over [0.5, 179.5] degrees, in radians."""
    count = int(round((GRID_STOP_DEG - GRID_START_DEG) / step_deg)) + 1
    return np.deg2rad(np.linspace(GRID_START_DEG, GRID_STOP_DEG, count))


def noise_subspace(R: HermitianCovariance, num_sources: int) -> tuple[np.ndarray, list]:
    M = R.num_sensors
    if not 1 <= num_sources < M:
        raise DomainError(f'MUSIC needs 1 <= N < M = {M}, got N = {num_sources}.')

    eigenvalues, eigenvectors = scipy.linalg.eigh(R.matrix)
    messages = []
    # ascending order: the smallest signal eigenvalue sits right after the noise ones
    gap = eigenvalues[M - num_sources] - eigenvalues[M - num_sources - 1]
    if gap <= EIGEN_GAP_TOLERANCE * max(abs(eigenvalues[-1]), 1.0):
        message = f'Signal and noise eigenvalues are not separated (gap {gap:.3e}); the subspaces are ambiguous.'
        warnings.warn(message, CalibrationWarning, stacklevel=3)
        messages.append(message)
    return eigenvectors[:, :M - num_sources], messages


def music_spectrum(R: HermitianCovariance, num_sources: int, grid, geometry: ArrayGeometry) -> MusicSpectrum:
    """
    Sampled MUSIC pseudo-spectrum over grid (radians).

    Raises:
        DomainError: If N is not in [1, M - 1].
    """
    grid = np.asarray(grid, dtype=float)
    En, messages = noise_subspace(R, num_sources)
    steering = manifold_matrix(grid, geometry)
    projection = np.sum(np.abs(En.conj().T @ steering) ** 2, axis=0)
    values = 1.0 / np.maximum(projection, np.finfo(float).tiny)
    return MusicSpectrum(grid, values, tuple(messages))


def refine_peak(grid: np.ndarray, values: np.ndarray, index: int) -> float:
    """Vertex of the parabola through the peak and its two neighbours (dB scale)."""
    if index <= 0 or index >= grid.size - 1:
        return float(grid[index])
    left, centre, right = 10.0 * np.log10(values[index - 1:index + 2])
    curvature = left - 2.0 * centre + right
    if curvature >= 0:
        return float(grid[index])
    shift = 0.5 * (left - right) / curvature
    step = grid[index + 1] - grid[index] if shift > 0 else grid[index] - grid[index - 1]
    return float(grid[index] + shift * step)


def spectrum_peaks(spectrum: MusicSpectrum, num_sources: int) -> tuple[np.ndarray, bool]:
    """The num_sources largest local maxima, refined and sorted ascending."""
    peaks, _ = scipy.signal.find_peaks(spectrum.values)
    failed = peaks.size < num_sources
    strongest = peaks[np.argsort(spectrum.values[peaks])[::-1][:num_sources]]
    angles = np.sort([refine_peak(spectrum.grid, spectrum.values, k) for k in strongest])
    return np.asarray(angles, dtype=float), failed


def estimate_doas(snapshots: SnapshotMatrix, estimate, num_sources: int, grid=None, geometry=None) -> DoaEstimate:
    """
    Calibrate the snapshots with estimate, then locate N MUSIC peaks.

    estimate may be None to skip calibration.
    """
    if geometry is None:
        if snapshots.scenario is None:
            raise DomainError('A geometry is needed when the snapshots carry no scenario.')
        geometry = snapshots.scenario.geometry
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)

    calibrated = snapshots if estimate is None else apply_calibration(snapshots, estimate)
    spectrum = music_spectrum(sample_covariance(calibrated), num_sources, grid, geometry)
    angles, failed = spectrum_peaks(spectrum, num_sources)
    if failed:
        logger.debug('MUSIC found %d of %d peaks', angles.size, num_sources)
    return DoaEstimate(angles, spectrum, failed, spectrum.warnings)


def match_to_truth(estimates, truth) -> np.ndarray:
    """
    Per-source errors in degrees, ordered like truth.

    Truth angles are folded into (0, pi) through arccos(cos(alpha)) and paired
    with the estimates by minimum total cos-space distance.

    Raises:
        DomainError: If there are fewer estimates than true sources.
    """
    estimates = np.asarray(estimates, dtype=float)
    folded = np.arccos(np.cos(np.asarray(truth, dtype=float)))
    if estimates.size < folded.size:
        raise DomainError(f'{estimates.size} estimates cannot be matched to {folded.size} sources.')

    cost = np.abs(np.cos(folded)[:, None] - np.cos(estimates)[None, :])
    rows, cols = scipy.optimize.linear_sum_assignment(cost)
    errors = np.empty(folded.size)
    errors[rows] = np.rad2deg(estimates[cols] - folded[rows])
    return errors
