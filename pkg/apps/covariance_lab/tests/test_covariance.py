"""
Test suite for covariance estimates, analytic covariances and Wishart draws.
"""
import numpy as np
import pytest

from array_model.exceptions import ConfigurationError, DomainError
from array_model.synthesis import synthesize
from covariance_lab.covariance import (
    CovarianceKind,
    HermitianCovariance,
    analytic_covariance,
    ds_shift,
    estimate_noise_floor,
    ml_ds_shift,
    sample_covariance,
    sample_wishart_covariances,
    toeplitz_covariance,
)
from covariance_lab.csv_io import read_covariance_csv, write_covariance_csv
from tests.factories import FramedScenarioFactory, ScenarioFactory


@pytest.mark.unit
class TestHermitianCovariance:
    """Test the covariance container."""

    def test_symmetrized_on_construction(self):
        """Should store (A + A^H) / 2 with an exactly real diagonal."""
        A = np.array([[1.0 + 0.2j, 2.0], [0.0, 3.0]])
        cov = HermitianCovariance(A)

        np.testing.assert_allclose(cov.matrix, [[1.0, 1.0], [1.0, 3.0]])
        np.testing.assert_array_equal(np.diag(cov.matrix).imag, 0.0)

    def test_read_only(self):
        """Should freeze the matrix."""
        with pytest.raises(ValueError):
            HermitianCovariance(np.eye(2)).matrix[0, 0] = 5.0

    def test_non_square_rejected(self):
        """Should reject non-square input."""
        with pytest.raises(DomainError):
            HermitianCovariance(np.zeros((2, 3)))


@pytest.mark.unit
class TestEstimators:
    """Test the raw, DS and ML-DS estimates."""

    def test_sample_covariance_is_hermitian(self):
        """Should form a Hermitian estimate tagged raw-Sigma with T."""
        snapshots = synthesize(ScenarioFactory(sample_size=100))
        cov = sample_covariance(snapshots)

        np.testing.assert_array_equal(cov.matrix, cov.matrix.conj().T)
        assert cov.kind == CovarianceKind.RAW_SIGMA
        assert cov.sample_size == 100

    def test_ds_shift_subtracts_known_level(self):
        """Should subtract sigma_w2 from the diagonal only."""
        sigma_hat = HermitianCovariance(np.array([[2.0, 0.5j], [-0.5j, 3.0]]), sample_size=10)
        shifted = ds_shift(sigma_hat, 0.5)

        np.testing.assert_allclose(shifted.matrix, [[1.5, 0.5j], [-0.5j, 2.5]])
        assert shifted.kind == CovarianceKind.DS

    def test_ds_shift_needs_raw_input(self):
        """Should refuse to shift an already shifted estimate."""
        shifted = ds_shift(HermitianCovariance(np.eye(3), sample_size=5), 0.1)
        with pytest.raises(DomainError):
            ds_shift(shifted, 0.1)

    def test_negative_noise_level_rejected(self):
        """Should reject a negative sigma_w2."""
        with pytest.raises(DomainError):
            ds_shift(HermitianCovariance(np.eye(3)), -0.1)

    def test_ml_ds_recovers_exact_noise_floor(self):
        """Should find sigma_w2 exactly when the noise subspace is white."""
        scenario = ScenarioFactory(sigma_v2=0.0, sigma_w2=0.3)
        sigma = HermitianCovariance(analytic_covariance(scenario).matrix, CovarianceKind.RAW_SIGMA, 1000)

        shifted, sigma_w2_hat = ml_ds_shift(sigma, scenario.sources.num_sources)

        assert sigma_w2_hat == pytest.approx(0.3, abs=1e-12)
        assert shifted.kind == CovarianceKind.ML_DS
        np.testing.assert_allclose(shifted.matrix, analytic_covariance(scenario.replace(sigma_w2=0.0)).matrix, atol=1e-12)

    def test_noise_floor_needs_fewer_sources_than_sensors(self):
        """Should reject N >= M."""
        with pytest.raises(DomainError):
            estimate_noise_floor(HermitianCovariance(np.eye(3)), 3)


@pytest.mark.unit
class TestAnalyticCovariance:
    """Test the Toeplitz and offset-affected analytic covariances."""

    def test_toeplitz_structure(self):
        """Should give C constant along every diagonal."""
        C = toeplitz_covariance(ScenarioFactory()).matrix
        for offset in range(1, 5):
            diagonal = np.diag(C, offset)
            np.testing.assert_allclose(diagonal, diagonal[0])

    def test_toeplitz_diagonal_is_total_power(self):
        """Should give C_11 = sum of source powers + sigma_v2."""
        C = toeplitz_covariance(ScenarioFactory(sigma_v2=0.25)).matrix
        assert C[0, 0].real == pytest.approx(3.25)

    def test_offsets_scale_entries(self):
        """Should give Sigma_ij = psi_i psi_j exp(j(phi_i - phi_j)) C_ij."""
        scenario = ScenarioFactory()
        C = toeplitz_covariance(scenario).matrix
        R = analytic_covariance(scenario).matrix
        d = scenario.offsets.as_diagonal()

        np.testing.assert_allclose(R[3, 1], d[3] * C[3, 1] * np.conj(d[1]))

    def test_framed_sources_use_nominal_power(self):
        """Should reduce framed source powers by the sync guard share."""
        scenario = FramedScenarioFactory(sigma_w2=0.0)
        C = toeplitz_covariance(scenario).matrix
        assert C[0, 0].real == pytest.approx(3 * 34 / 40 + 0.1)


@pytest.mark.integration
class TestWishartDraws:
    """Test direct draws of sample covariances."""

    def test_mean_is_the_covariance(self, rng):
        """Should average to R."""
        R = analytic_covariance(ScenarioFactory(geometry__num_sensors=4,
                                                offsets__gains=np.ones(4), offsets__phases=np.zeros(4),
                                                sources__azimuths=np.deg2rad([-35.0, -73.0]))).matrix
        draws = sample_wishart_covariances(R, 50, 20_000, rng)

        assert draws.shape == (20_000, 4, 4)
        np.testing.assert_allclose(draws.mean(axis=0), R, atol=0.05 * np.abs(R).max())

    def test_diagonal_variance(self, rng):
        """Should give Var(Sigma_hat_ii) = R_ii^2 / T."""
        R = np.array([[2.0, 0.5 + 0.5j, 0.1], [0.5 - 0.5j, 1.5, 0.2j], [0.1, -0.2j, 1.0]])
        draws = sample_wishart_covariances(R, 40, 40_000, rng)

        variances = np.var(draws[:, [0, 1, 2], [0, 1, 2]].real, axis=0)
        np.testing.assert_allclose(variances, np.diag(R).real ** 2 / 40, rtol=0.05)

    def test_small_sample_size_draws_snapshots(self, rng):
        """Should fall back to explicit snapshots when T < M and stay rank deficient."""
        draws = sample_wishart_covariances(np.eye(4), 2, 10, rng)
        assert draws.shape == (10, 4, 4)
        assert np.linalg.matrix_rank(draws[0]) == 2


@pytest.mark.unit
class TestCovarianceCsv:
    """Test the interleaved CSV format."""

    def test_round_trip_is_exact(self, tmp_path):
        """Should reload the matrix bit for bit."""
        cov = analytic_covariance(ScenarioFactory())
        loaded = read_covariance_csv(write_covariance_csv(cov, tmp_path / 'R.csv'), CovarianceKind.ANALYTIC, 750)

        np.testing.assert_array_equal(loaded.matrix, cov.matrix)
        assert loaded.sample_size == 750

    def test_line_layout(self, tmp_path):
        """Should write M lines of 2M values."""
        path = write_covariance_csv(HermitianCovariance(np.eye(3)), tmp_path / 'I.csv')
        lines = path.read_text().splitlines()

        assert len(lines) == 3
        assert all(len(line.split(',')) == 6 for line in lines)

    def test_ragged_file_rejected(self, tmp_path):
        """Should reject rows of the wrong length."""
        path = tmp_path / 'ragged.csv'
        path.write_text('1.0,0.0,0.5,0.0\n0.5,0.0\n')
        with pytest.raises(ConfigurationError):
            read_covariance_csv(path)

    def test_missing_file_rejected(self, tmp_path):
        """Should name the missing file."""
        with pytest.raises(ConfigurationError) as exc_info:
            read_covariance_csv(tmp_path / 'absent.csv')
        assert 'absent.csv' in str(exc_info.value)
