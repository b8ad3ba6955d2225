"""
Test suite for the transformed noise statistics.
"""
import numpy as np
import pytest

from array_model.exceptions import DomainError
from covariance_lab.covariance import HermitianCovariance, analytic_covariance, sample_wishart_covariances
from covariance_lab.system import build_design_matrix, measurement_noise
from owls_engine.cumulants import CumulantTable
from owls_engine.statistics import (
    NoiseVariant,
    noise_covariance_gaussian,
    noise_covariance_qml,
    noise_mean,
)
from tests.factories import ScenarioFactory


@pytest.mark.unit
class TestNoiseMean:
    """Test eta."""

    def test_mu_rows_carry_the_bias(self):
        """Should put -1/(2T) on mu-rows and 0 on nu-rows."""
        system = build_design_matrix(4)
        eta = noise_mean(4, 100)

        np.testing.assert_allclose(eta[system.is_mu], -0.005)
        np.testing.assert_array_equal(eta[~system.is_mu], 0.0)

    def test_reduced_length(self):
        """Should follow the reduced row order."""
        assert noise_mean(5, 10, reduced=True).shape == (20,)

    def test_non_positive_sample_size_rejected(self):
        """Should reject T < 1."""
        with pytest.raises(DomainError):
            noise_mean(4, 0)


@pytest.mark.unit
class TestGaussianCovariance:
    """Test Lambda for circular Gaussian data."""

    def test_symmetric_and_psd(self):
        """Should give a symmetric positive semidefinite Lambda."""
        R = analytic_covariance(ScenarioFactory())
        stats = noise_covariance_gaussian(R, 750)

        np.testing.assert_array_equal(stats.covariance, stats.covariance.T)
        assert stats.is_psd()
        assert stats.variant == NoiseVariant.GAUSSIAN_ML

    def test_diagonal_entry_variance(self):
        """Should give Var(mu_ii) = 1/T - 1/(4T^2) for a diagonal entry."""
        R = analytic_covariance(ScenarioFactory())
        stats = noise_covariance_gaussian(R, 200)
        system = build_design_matrix(5)
        row = [k for k, (i, j, part) in enumerate(system.index_map) if (i, j, part) == (3, 3, 'mu')][0]

        assert stats.covariance[row, row] == pytest.approx(1 / 200 - 1 / (4 * 200 ** 2), rel=1e-12)

    def test_gain_phase_cross_block_is_non_zero(self):
        """Should couple mu-rows and nu-rows."""
        stats = noise_covariance_gaussian(analytic_covariance(ScenarioFactory()), 750)
        cross = stats.covariance[np.ix_(stats.is_mu, ~stats.is_mu)]
        assert np.abs(cross).max() > 1e-6

    def test_block_diagonal_drops_the_cross_block(self):
        """Should zero the mu/nu blocks and keep the rest."""
        stats = noise_covariance_gaussian(analytic_covariance(ScenarioFactory()), 750)
        separated = stats.block_diagonal()
        mu = stats.is_mu

        np.testing.assert_array_equal(separated.covariance[np.ix_(mu, ~mu)], 0.0)
        np.testing.assert_array_equal(separated.covariance[np.ix_(mu, mu)], stats.covariance[np.ix_(mu, mu)])

    def test_reduced_statistics_skip_the_diagonal(self):
        """Should produce M(M - 1) rows for the reduced system."""
        stats = noise_covariance_gaussian(analytic_covariance(ScenarioFactory()), 750, reduced=True)
        assert stats.covariance.shape == (20, 20)
        assert stats.reduced

    def test_zero_entry_rejected(self):
        """Should raise DomainError when a used entry vanishes."""
        with pytest.raises(DomainError):
            noise_covariance_gaussian(HermitianCovariance(np.eye(4)), 100)

    @pytest.mark.slow
    def test_matches_monte_carlo_variances(self, rng):
        """Should predict the empirical variance of xi within 10 percent."""
        R = analytic_covariance(ScenarioFactory())
        T = 2000
        draws = sample_wishart_covariances(R, T, 4000, rng)
        xi = np.array([measurement_noise(HermitianCovariance(draw, sample_size=T), R) for draw in draws])

        predicted = noise_covariance_gaussian(R, T)
        np.testing.assert_allclose(np.var(xi, axis=0), np.diag(predicted.covariance), rtol=0.1)


@pytest.mark.unit
class TestQmlCovariance:
    """Test the cumulant-corrected statistics."""

    def test_zero_cumulants_reduce_to_gaussian(self):
        """Should equal the Gaussian Lambda when kappa = 0."""
        R = analytic_covariance(ScenarioFactory())
        gaussian = noise_covariance_gaussian(R, 750)
        qml = noise_covariance_qml(R, CumulantTable.zeros(5, 750), 750)

        np.testing.assert_allclose(qml.covariance, gaussian.covariance, atol=1e-15)
        np.testing.assert_array_equal(qml.eta, gaussian.eta)
        assert qml.variant == NoiseVariant.QML

    def test_negative_kurtosis_lowers_variance(self):
        """Should shrink the diagonal-entry variance for constant-modulus data."""
        R = HermitianCovariance(np.eye(2) + 0.5)
        kappa = np.zeros((2, 2, 2, 2), dtype=complex)
        kappa[0, 0, 0, 0] = -0.5
        gaussian = noise_covariance_gaussian(R, 100)
        qml = noise_covariance_qml(R, kappa, 100)

        assert qml.covariance[0, 0] < gaussian.covariance[0, 0]

    def test_cumulant_shape_must_match(self):
        """Should reject a cumulant table for a different M."""
        with pytest.raises(DomainError):
            noise_covariance_qml(analytic_covariance(ScenarioFactory()), CumulantTable.zeros(4, 750), 750)

    def test_properness_flag_is_carried(self):
        """Should keep the properness flag of the cumulant table."""
        table = CumulantTable(np.zeros((5,) * 4, dtype=complex), 750, properness_violated=True)
        stats = noise_covariance_qml(analytic_covariance(ScenarioFactory()), table, 750)
        assert stats.properness_violated
