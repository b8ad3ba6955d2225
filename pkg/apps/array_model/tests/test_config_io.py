"""
Test suite for scenario validation and the INI round trip.
"""
import numpy as np
import pytest

from array_model.config_io import dump_scenario, load_scenario, read_config
from array_model.exceptions import ConfigurationError
from array_model.scenario import (
    Constellation,
    FrameSpec,
    SourceDistribution,
    sigma_v2_to_snr,
    snr_to_sigma_v2,
)
from array_model.serializers import FrameSpecSerializer, ScenarioSerializer
from tests.factories import FramedScenarioFactory, ScenarioFactory

REFERENCE_SECTION = {
    'num_sensors': '5',
    'azimuths': '-35, -73, -28',
    'gains': '1, 1.3, 1.1, 0.7, 2.2',
    'phases': '0, 0, 5, 11, -8',
    'snr_db': '10',
    'sample_size': '750',
}


def write_ini(path, text):
    path.write_text(text, encoding='utf-8')
    return path


@pytest.mark.unit
class TestSnrConvention:
    """Test the SNR <-> sigma_v2 mapping for unit-power sources."""

    def test_ten_db(self):
        """Should map 10 dB to sigma_v2 = 0.1."""
        assert snr_to_sigma_v2(10.0) == pytest.approx(0.1)

    def test_zero_db(self):
        """Should map 0 dB to unit noise variance."""
        assert snr_to_sigma_v2(0.0) == pytest.approx(1.0)

    def test_inverse(self):
        """Should invert snr_to_sigma_v2."""
        assert sigma_v2_to_snr(snr_to_sigma_v2(17.5)) == pytest.approx(17.5)


@pytest.mark.unit
class TestScenarioSerializer:
    """Test validation of the [array_model] section."""

    def test_reference_section(self):
        """Should build the reference scenario with angles converted to radians."""
        serializer = ScenarioSerializer(data=REFERENCE_SECTION)
        assert serializer.is_valid(), serializer.errors
        scenario = serializer.save()

        assert scenario.num_sensors == 5
        assert scenario.sigma_v2 == pytest.approx(0.1)
        np.testing.assert_allclose(scenario.sources.azimuths, np.deg2rad([-35.0, -73.0, -28.0]))
        np.testing.assert_allclose(scenario.offsets.phases, np.deg2rad([0.0, 0.0, 5.0, 11.0, -8.0]))
        np.testing.assert_allclose(scenario.sources.powers, np.ones(3))

    def test_offsets_default_to_identity(self):
        """Should default to unit gains and zero phases."""
        serializer = ScenarioSerializer(data={'num_sensors': '4', 'azimuths': '30'})
        assert serializer.is_valid(), serializer.errors
        scenario = serializer.save()

        np.testing.assert_array_equal(scenario.offsets.gains, np.ones(4))
        assert scenario.sigma_v2 == pytest.approx(0.1)

    def test_too_many_sources_rejected(self):
        """Should require N < M - 1."""
        data = dict(REFERENCE_SECTION, num_sensors='4', gains='1, 1, 1, 1', phases='0, 0, 0, 0')
        serializer = ScenarioSerializer(data=data)

        assert not serializer.is_valid()
        assert 'azimuths' in serializer.errors

    def test_duplicate_azimuths_rejected(self):
        """Should require distinct azimuths."""
        serializer = ScenarioSerializer(data=dict(REFERENCE_SECTION, azimuths='-35, -35'))

        assert not serializer.is_valid()
        assert 'azimuths' in serializer.errors

    def test_gain_count_must_match(self):
        """Should reject a gain list of the wrong length."""
        serializer = ScenarioSerializer(data=dict(REFERENCE_SECTION, gains='1, 1.3'))

        assert not serializer.is_valid()
        assert 'gains' in serializer.errors

    def test_negative_gain_rejected(self):
        """Should reject non-positive gains."""
        serializer = ScenarioSerializer(data=dict(REFERENCE_SECTION, gains='1, -1.3, 1.1, 0.7, 2.2'))

        assert not serializer.is_valid()
        assert 'gains' in serializer.errors

    def test_reference_gain_enforced(self):
        """Should reject a first gain other than 1."""
        serializer = ScenarioSerializer(data=dict(REFERENCE_SECTION, gains='2, 1.3, 1.1, 0.7, 2.2'))

        assert not serializer.is_valid()
        assert 'gains' in serializer.errors

    @pytest.mark.parametrize('phases', ['10, 0, 5, 11, -8', '0, 10, 5, 11, -8'])
    def test_reference_phases_enforced(self, phases):
        """Should reject non-zero phases on the first two sensors."""
        serializer = ScenarioSerializer(data=dict(REFERENCE_SECTION, phases=phases))

        assert not serializer.is_valid()
        assert 'phases' in serializer.errors

    def test_snr_and_sigma_are_exclusive(self):
        """Should reject both snr_db and sigma_v2."""
        serializer = ScenarioSerializer(data=dict(REFERENCE_SECTION, sigma_v2='0.1'))

        assert not serializer.is_valid()
        assert 'snr_db' in serializer.errors

    def test_framed_sources_need_frame_spec(self):
        """Should reject framed sources without a frame specification."""
        serializer = ScenarioSerializer(data=dict(REFERENCE_SECTION, distribution='framed-comm'))

        assert not serializer.is_valid()
        assert 'distribution' in serializer.errors


@pytest.mark.unit
class TestFrameSpecSerializer:
    """Test validation of the [framed] section."""

    def test_defaults(self):
        """Should default to 40-sample frames with an 8-sample guard."""
        serializer = FrameSpecSerializer(data={})
        assert serializer.is_valid(), serializer.errors
        spec = serializer.save()

        assert isinstance(spec, FrameSpec)
        assert spec.packet_length == 32
        assert spec.constellations == (Constellation.PSK8_OFDM, Constellation.PSK8_OFDM, Constellation.PAM4)
        assert spec.stretch == ((1, 1), (2, 1), (3, 2))

    def test_stretch_pairs_parsed(self):
        """Should parse 'factor:offset' pairs."""
        serializer = FrameSpecSerializer(data={'constellations': '4pam, 4pam', 'stretch': '1:0, 4:3'})
        assert serializer.is_valid(), serializer.errors
        assert serializer.save().stretch == ((1, 0), (4, 3))

    def test_malformed_stretch_rejected(self):
        """Should reject stretch values without a colon."""
        serializer = FrameSpecSerializer(data={'constellations': '4pam', 'stretch': '2'})

        assert not serializer.is_valid()
        assert 'stretch' in serializer.errors

    def test_sync_longer_than_frame_rejected(self):
        """Should require the sync guard to be shorter than the frame."""
        serializer = FrameSpecSerializer(data={'frame_length': '8', 'sync_length': '8'})

        assert not serializer.is_valid()
        assert 'sync_length' in serializer.errors


@pytest.mark.unit
class TestConfigFiles:
    """Test reading and writing scenario files."""

    def test_missing_file_names_the_path(self, tmp_path):
        """Should raise ConfigurationError naming the missing file."""
        path = tmp_path / 'absent.ini'
        with pytest.raises(ConfigurationError) as exc_info:
            read_config(path)

        assert str(path) in str(exc_info.value)

    def test_unparsable_file_rejected(self, tmp_path):
        """Should raise ConfigurationError for text that is not INI."""
        path = write_ini(tmp_path / 'broken.ini', 'num_sensors = 5\n')
        with pytest.raises(ConfigurationError):
            read_config(path)

    def test_missing_scenario_section(self, tmp_path):
        """Should require an [array_model] section."""
        path = write_ini(tmp_path / 'empty.ini', '[calib_cli]\nexperiment = mse-vs-T\n')
        with pytest.raises(ConfigurationError) as exc_info:
            load_scenario(path)

        assert 'array_model' in str(exc_info.value)

    def test_invalid_values_carry_field_errors(self, tmp_path):
        """Should attach serializer field errors to the ConfigurationError."""
        path = write_ini(tmp_path / 'bad.ini', '[array_model]\nnum_sensors = 1\nazimuths = 10\n')
        with pytest.raises(ConfigurationError) as exc_info:
            load_scenario(path)

        assert 'num_sensors' in exc_info.value.errors

    def test_non_reference_offsets_rejected(self, tmp_path):
        """Should refuse ground truth that no estimator can recover."""
        path = write_ini(tmp_path / 'shifted.ini', (
            '[array_model]\nnum_sensors = 5\nazimuths = -35, -73, -28\n'
            'gains = 2, 1.3, 1.1, 0.7, 2.2\nphases = 0, 10, 5, 11, -8\n'
        ))
        with pytest.raises(ConfigurationError) as exc_info:
            load_scenario(path)

        assert {'gains', 'phases'} <= set(exc_info.value.errors)

    def test_round_trip(self, tmp_path):
        """Should reload a dumped scenario with identical values."""
        scenario = ScenarioFactory(sigma_w2=0.05, seed=11, sample_size=1200)
        loaded = load_scenario(dump_scenario(scenario, tmp_path / 'scenario.ini'))

        assert loaded.num_sensors == scenario.num_sensors
        assert loaded.sample_size == 1200
        assert loaded.seed == 11
        assert loaded.sigma_w2 == pytest.approx(0.05)
        np.testing.assert_allclose(loaded.sources.azimuths, scenario.sources.azimuths, rtol=1e-14)
        np.testing.assert_allclose(loaded.offsets.phases, scenario.offsets.phases, atol=1e-15)
        np.testing.assert_allclose(loaded.offsets.gains, scenario.offsets.gains)

    def test_framed_round_trip(self, tmp_path):
        """Should write and reload the [framed] section."""
        scenario = FramedScenarioFactory()
        loaded = load_scenario(dump_scenario(scenario, tmp_path / 'framed.ini'))

        assert loaded.sources.distribution == SourceDistribution.FRAMED_COMM
        assert loaded.sources.frame_spec.stretch == scenario.sources.frame_spec.stretch
        assert loaded.sources.frame_spec.constellations == scenario.sources.frame_spec.constellations
