"""
Test suite for MUSIC direction finding.
"""
import numpy as np
import pytest

from array_model.exceptions import CalibrationWarning, DomainError
from array_model.geometry import ArrayGeometry, OffsetVector
from array_model.scenario import SnapshotMatrix
from array_model.synthesis import synthesize
from covariance_lab.covariance import HermitianCovariance, analytic_covariance
from doa_music.music import (
    MusicSpectrum,
    default_grid,
    estimate_doas,
    match_to_truth,
    music_spectrum,
    refine_peak,
    spectrum_peaks,
)
from owls_engine.solvers import oracle_estimate
from tests.factories import ScenarioFactory

TWO_SOURCES = np.deg2rad([-35.0, -73.0])


@pytest.fixture
def ideal_scenario():
    """Offset-free M = 5 array with the two DOA test sources."""
    return ScenarioFactory(offsets=OffsetVector.identity(5), sources__azimuths=TWO_SOURCES, sample_size=2000)


@pytest.mark.unit
class TestGrid:
    """Test the search grid."""

    def test_default_grid(self):
        """Should cover 0.5 to 179.5 degrees in 0.02 degree steps."""
        grid = np.rad2deg(default_grid())

        assert grid.size == 8951
        assert grid[0] == pytest.approx(0.5)
        assert grid[-1] == pytest.approx(179.5)
        assert np.diff(grid) == pytest.approx(0.02)


@pytest.mark.unit
class TestSpectrum:
    """Test the pseudo-spectrum and its peaks."""

    def test_peaks_at_true_directions(self, ideal_scenario):
        """Should peak at the folded true azimuths for the exact covariance."""
        spectrum = music_spectrum(analytic_covariance(ideal_scenario), 2, default_grid(), ideal_scenario.geometry)
        angles, failed = spectrum_peaks(spectrum, 2)

        assert not failed
        np.testing.assert_allclose(np.rad2deg(angles), [35.0, 73.0], atol=0.02)

    def test_pairs(self, ideal_scenario):
        """Should pair every grid angle with its value."""
        grid = default_grid(1.0)
        spectrum = music_spectrum(analytic_covariance(ideal_scenario), 2, grid, ideal_scenario.geometry)
        assert len(spectrum.pairs()) == grid.size

    def test_source_count_out_of_range(self, ideal_scenario):
        """Should require 1 <= N < M."""
        R = analytic_covariance(ideal_scenario)
        for num_sources in (0, 5):
            with pytest.raises(DomainError):
                music_spectrum(R, num_sources, default_grid(), ideal_scenario.geometry)

    def test_ambiguous_subspace_warns(self):
        """Should warn when the signal and noise eigenvalues coincide."""
        with pytest.warns(CalibrationWarning):
            spectrum = music_spectrum(HermitianCovariance(np.eye(4)), 1, default_grid(1.0), ArrayGeometry(4))
        assert spectrum.warnings

    def test_detection_failure(self):
        """Should flag a spectrum with fewer maxima than sources."""
        grid = np.linspace(0.1, 3.0, 50)
        values = np.exp(-(grid - 1.0) ** 2)
        angles, failed = spectrum_peaks(MusicSpectrum(grid, values), 2)

        assert failed
        assert angles.size == 1


@pytest.mark.unit
class TestRefinePeak:
    """Test the parabolic peak refinement."""

    def test_parabola_vertex(self):
        """Should recover the vertex of a parabola in dB."""
        grid = np.array([0.0, 1.0, 2.0])
        values = 10.0 ** (-(grid - 1.2) ** 2 / 10.0)
        assert refine_peak(grid, values, 1) == pytest.approx(1.2)

    def test_edge_peak_is_not_refined(self):
        """Should return the grid point at either end of the grid."""
        grid = np.array([0.0, 1.0, 2.0])
        assert refine_peak(grid, np.array([3.0, 2.0, 1.0]), 0) == 0.0


@pytest.mark.unit
class TestMatchToTruth:
    """Test pairing estimates with the true sources."""

    def test_folds_and_orders_like_truth(self):
        """Should fold negative azimuths and report errors in truth order."""
        errors = match_to_truth(np.deg2rad([35.1, 73.2]), np.deg2rad([-73.0, -35.0]))
        np.testing.assert_allclose(errors, [0.2, 0.1], atol=1e-9)

    def test_extra_estimates_are_ignored(self):
        """Should pick the closest estimates when there are more than sources."""
        errors = match_to_truth(np.deg2rad([10.0, 35.5, 120.0]), np.deg2rad([35.0]))
        np.testing.assert_allclose(errors, [0.5], atol=1e-9)

    def test_too_few_estimates(self):
        """Should reject fewer estimates than sources."""
        with pytest.raises(DomainError):
            match_to_truth(np.deg2rad([35.0]), TWO_SOURCES)


@pytest.mark.integration
class TestEstimateDoas:
    """Test MUSIC on calibrated snapshots."""

    def test_oracle_calibration_finds_both_sources(self):
        """Should locate both sources within a degree at 10 dB and T = 2000."""
        scenario = ScenarioFactory(seed=21, sources__azimuths=TWO_SOURCES, sample_size=2000)
        snapshots = synthesize(scenario)
        doas = estimate_doas(snapshots, oracle_estimate(snapshots), 2)

        assert not doas.detection_failed
        assert np.all(np.abs(match_to_truth(doas.angles, TWO_SOURCES)) < 1.0)

    def test_geometry_needed_without_scenario(self):
        """Should need a geometry for bare snapshots."""
        with pytest.raises(DomainError):
            estimate_doas(SnapshotMatrix(np.ones((4, 10))), None, 1)
