"""
Experiment definitions and their configuration files.

An experiment file carries the scenario sections of array_model plus a
[calib_cli] section. One file can serve several experiments: a section named
'<section>:<experiment id>' overrides the keys of '<section>' for that
experiment only, e.g. [calib_cli:mse-vs-snr] or [array_model:extended-cases].
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from pathlib import Path

from django.conf import settings
from django.db import models
from rest_framework import serializers

from array_model.config_io import FRAMED_SECTION, SCENARIO_SECTION, read_config, scenario_from_parser, validate_section
from array_model.exceptions import ConfigurationError
from array_model.scenario import ScenarioConfig
from array_model.serializers import CommaSeparatedListField
from owls_engine.estimates import CalibrationMethod

EXPERIMENT_SECTION = 'calib_cli'


class ExperimentId(models.TextChoices):
    MSE_VS_T = 'mse-vs-T', 'MSE vs sample size'
    MSE_VS_SNR = 'mse-vs-snr', 'MSE vs SNR'
    NONGAUSSIAN_MSE_VS_T = 'nongaussian-mse-vs-T', 'Non-Gaussian sources, MSE vs sample size'
    FRAMED_MSE_VS_T = 'framed-mse-vs-T', 'Framed communication sources, MSE vs sample size'
    DOA_VS_T = 'doa-vs-T', 'Post-calibration DOA vs sample size'
    DOA_VS_SNR = 'doa-vs-snr', 'Post-calibration DOA vs SNR'
    ORACLE_VALIDATE = 'oracle-validate', 'Noise statistics oracle'
    EXTENDED_CASES = 'extended-cases', 'Known vs estimated internal noise'


class SweepAxis(models.TextChoices):
    SAMPLE_SIZE = 'T', 'Sample size'
    SNR = 'snr_db', 'SNR [dB]'


class NoiseCase(models.TextChoices):
    """How the internal noise w[t] is handled."""
    PURE = 'pure', 'No internal noise'
    KNOWN = 'known-sigma-w2', 'Known internal noise (DS)'
    ESTIMATED = 'estimated-sigma-w2', 'Estimated internal noise (ML-DS)'
    REDUCED = 'reduced', 'Unknown internal noise, diagonal discarded'


BUNDLED_CONFIGS = {
    ExperimentId.MSE_VS_T: 'gaussian.ini',
    ExperimentId.MSE_VS_SNR: 'gaussian.ini',
    ExperimentId.EXTENDED_CASES: 'gaussian.ini',
    ExperimentId.NONGAUSSIAN_MSE_VS_T: 'nongaussian.ini',
    ExperimentId.FRAMED_MSE_VS_T: 'framed.ini',
    ExperimentId.DOA_VS_T: 'doa.ini',
    ExperimentId.DOA_VS_SNR: 'doa.ini',
    ExperimentId.ORACLE_VALIDATE: 'oracle.ini',
}

DOA_EXPERIMENTS = (ExperimentId.DOA_VS_T, ExperimentId.DOA_VS_SNR)


@dataclass(frozen=True, eq=False)
class ExperimentSpec:
    """
    A Monte Carlo sweep over one scenario axis.

    Every sweep point runs the same trial indices; trial i always draws from
    the generator seeded with (master_seed, i).
    """
    experiment_id: ExperimentId
    scenario: ScenarioConfig
    sweep_name: SweepAxis
    sweep_values: tuple
    trials: int
    methods: tuple
    master_seed: int = 0
    noise_case: NoiseCase = NoiseCase.PURE

    def __post_init__(self):
        object.__setattr__(self, 'experiment_id', ExperimentId(self.experiment_id))
        object.__setattr__(self, 'sweep_name', SweepAxis(self.sweep_name))
        object.__setattr__(self, 'noise_case', NoiseCase(self.noise_case))
        object.__setattr__(self, 'methods', tuple(CalibrationMethod(m) for m in self.methods))
        object.__setattr__(self, 'sweep_values', tuple(self.sweep_values))

        errors = {}
        if self.trials < 1:
            errors['trials'] = 'At least one trial is required.'
        if not self.sweep_values:
            errors['sweep_values'] = 'The sweep needs at least one value.'
        elif list(self.sweep_values) != sorted(self.sweep_values):
            errors['sweep_values'] = 'Sweep values must be sorted ascending.'
        elif self.sweep_name == SweepAxis.SAMPLE_SIZE and any(v < 1 or int(v) != v for v in self.sweep_values):
            errors['sweep_values'] = 'Sample sizes must be positive integers.'
        if not self.methods and self.experiment_id != ExperimentId.ORACLE_VALIDATE:
            errors['methods'] = 'At least one method is required.'
        if CalibrationMethod.R_ML_OWLS in self.methods and self.scenario.num_sensors < 4:
            errors['methods'] = 'R-ML-OWLS needs at least 4 sensors.'
        if self.noise_case == NoiseCase.ESTIMATED and self.scenario.sources.num_sources >= self.scenario.num_sensors:
            errors['noise_case'] = 'ML-DS needs fewer sources than sensors.'
        if errors:
            raise ConfigurationError('Invalid experiment.', errors)

    @property
    def is_doa(self) -> bool:
        return self.experiment_id in DOA_EXPERIMENTS

    def scenario_at(self, value) -> ScenarioConfig:
        if self.sweep_name == SweepAxis.SAMPLE_SIZE:
            return self.scenario.replace(sample_size=int(value))
        return self.scenario.with_snr(float(value))

    def replace(self, **changes) -> ExperimentSpec:
        return dataclasses.replace(self, **changes)


class ExperimentSerializer(serializers.Serializer):
    """
    Serializer for the [calib_cli] section.

    Handles:
    - Experiment id, sweep axis and sweep values
    - Trial count (defaults to CALIB_DEFAULT_TRIALS) and master seed
    - Methods and the internal-noise case
    """

    experiment = serializers.ChoiceField(choices=ExperimentId.choices)
    sweep_name = serializers.ChoiceField(choices=SweepAxis.choices, default=SweepAxis.SAMPLE_SIZE)
    sweep_values = CommaSeparatedListField(child=serializers.FloatField(), min_length=1)
    trials = serializers.IntegerField(min_value=1, required=False)
    methods = CommaSeparatedListField(
        child=serializers.ChoiceField(choices=CalibrationMethod.choices),
        required=False,
    )
    master_seed = serializers.IntegerField(min_value=0, max_value=2**64 - 1, default=0)
    noise_case = serializers.ChoiceField(choices=NoiseCase.choices, default=NoiseCase.PURE)

    def validate_sweep_values(self, value):
        if value != sorted(value):
            raise serializers.ValidationError('Sweep values must be sorted ascending.')
        return value

    def validate(self, attrs):
        if attrs['sweep_name'] == SweepAxis.SAMPLE_SIZE and any(v < 1 or int(v) != v for v in attrs['sweep_values']):
            raise serializers.ValidationError({'sweep_values': 'Sample sizes must be positive integers.'})
        if not attrs.get('methods') and attrs['experiment'] != ExperimentId.ORACLE_VALIDATE:
            raise serializers.ValidationError({'methods': 'At least one method is required.'})
        return attrs

    def create(self, validated_data):
        sweep_name = validated_data['sweep_name']
        values = validated_data['sweep_values']
        if sweep_name == SweepAxis.SAMPLE_SIZE:
            values = [int(v) for v in values]
        try:
            return ExperimentSpec(
                experiment_id=validated_data['experiment'],
                scenario=self.context['scenario'],
                sweep_name=sweep_name,
                sweep_values=tuple(values),
                trials=validated_data.get('trials', settings.CALIB_DEFAULT_TRIALS),
                methods=tuple(validated_data.get('methods', ())),
                master_seed=validated_data['master_seed'],
                noise_case=validated_data['noise_case'],
            )
        except ConfigurationError as exc:
            raise serializers.ValidationError(exc.errors or str(exc))


def bundled_config_path(experiment_id) -> Path:
    return Path(settings.CALIB_EXPERIMENT_CONFIG_DIR) / BUNDLED_CONFIGS[ExperimentId(experiment_id)]


def _merged_sections(parser: configparser.ConfigParser, experiment_id: str) -> configparser.ConfigParser:
    merged = configparser.ConfigParser()
    for section in (SCENARIO_SECTION, FRAMED_SECTION, EXPERIMENT_SECTION):
        values = {}
        if parser.has_section(section):
            values.update(parser[section])
        override = f'{section}:{experiment_id}'
        if parser.has_section(override):
            values.update(parser[override])
        if values:
            merged[section] = values
    return merged


def load_experiment(path=None, experiment_id=None) -> ExperimentSpec:
    """
    Build an ExperimentSpec from a configuration file.

    Without a path the bundled file for experiment_id is used. An explicit
    experiment_id takes precedence over the one named in the file.

    Raises:
        ConfigurationError: If the file is missing, the id is unknown or any
            section is invalid.
    """
    if experiment_id is not None and experiment_id not in ExperimentId.values:
        raise ConfigurationError(
            f"Unknown experiment '{experiment_id}'. Choose one of: {', '.join(ExperimentId.values)}."
        )
    if path is None:
        if experiment_id is None:
            raise ConfigurationError('Either a configuration file or an experiment id is required.')
        path = bundled_config_path(experiment_id)

    parser = read_config(path)
    if experiment_id is None:
        if not parser.has_option(EXPERIMENT_SECTION, 'experiment'):
            raise ConfigurationError(f'{path}: no experiment id given and none in [{EXPERIMENT_SECTION}].')
        experiment_id = parser.get(EXPERIMENT_SECTION, 'experiment')

    merged = _merged_sections(parser, experiment_id)
    scenario = scenario_from_parser(merged, source=str(path))
    section = dict(merged[EXPERIMENT_SECTION]) if merged.has_section(EXPERIMENT_SECTION) else {}
    section['experiment'] = experiment_id
    return validate_section(ExperimentSerializer, section, EXPERIMENT_SECTION, scenario=scenario)
