"""
INI round trip for scenarios.

    [array_model]
    num_sensors = 5
    azimuths = -35, -73, -28
    phases = 0, 0, 5, 11, -8
    ...

    [framed]
    frame_length = 40
    ...

Angles are written in degrees and held in radians everywhere else.
"""
from __future__ import annotations

import configparser
from pathlib import Path

import numpy as np
from rest_framework import serializers

from .exceptions import ConfigurationError
from .scenario import ScenarioConfig, SourceDistribution
from .serializers import FrameSpecSerializer, ScenarioSerializer, StretchField

SCENARIO_SECTION = 'array_model'
FRAMED_SECTION = 'framed'


def read_config(path) -> configparser.ConfigParser:
    """
    Parse an INI file.

    Raises:
        ConfigurationError: If the file is missing or is not valid INI.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f'Configuration file not found: {path}')

    parser = configparser.ConfigParser(inline_comment_prefixes=('#', ';'))
    try:
        with path.open(encoding='utf-8') as handle:
            parser.read_file(handle)
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise ConfigurationError(f'Cannot parse configuration file {path}: {exc}') from exc
    return parser


def validate_section(serializer_class, data, section: str, **context):
    """Run a serializer over one section and build its object, or raise ConfigurationError."""
    serializer = serializer_class(data=dict(data), context=context)
    if not serializer.is_valid():
        raise ConfigurationError(f'Invalid [{section}] section.', dict(serializer.errors))
    try:
        return serializer.save()
    except serializers.ValidationError as exc:
        errors = exc.detail if isinstance(exc.detail, dict) else {'non_field_errors': exc.detail}
        raise ConfigurationError(f'Invalid [{section}] section.', errors) from exc


def scenario_from_parser(parser: configparser.ConfigParser, source: str = '<config>') -> ScenarioConfig:
    if not parser.has_section(SCENARIO_SECTION):
        raise ConfigurationError(f'{source}: missing [{SCENARIO_SECTION}] section.')

    frame_spec = None
    if parser.has_section(FRAMED_SECTION):
        frame_spec = validate_section(FrameSpecSerializer, parser[FRAMED_SECTION], FRAMED_SECTION)
    return validate_section(ScenarioSerializer, parser[SCENARIO_SECTION], SCENARIO_SECTION, frame_spec=frame_spec)


def load_scenario(path) -> ScenarioConfig:
    """
    Load a ScenarioConfig from an INI file.

    Raises:
        ConfigurationError: If the file is missing or any value is invalid.
    """
    return scenario_from_parser(read_config(path), source=str(path))


def _join(values) -> str:
    return ', '.join(repr(float(v)) for v in values)


def scenario_to_parser(scenario: ScenarioConfig) -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    parser[SCENARIO_SECTION] = {
        'num_sensors': str(scenario.geometry.num_sensors),
        'spacing_over_wavelength': repr(float(scenario.geometry.spacing_over_wavelength)),
        'azimuths': _join(np.rad2deg(scenario.sources.azimuths)),
        'powers': _join(scenario.sources.powers),
        'distribution': scenario.sources.distribution.value,
        'gains': _join(scenario.offsets.gains),
        'phases': _join(np.rad2deg(scenario.offsets.phases)),
        'sigma_v2': repr(float(scenario.sigma_v2)),
        'sigma_w2': repr(float(scenario.sigma_w2)),
        'noise_distribution': scenario.noise_distribution.value,
        'sample_size': str(int(scenario.sample_size)),
        'seed': str(int(scenario.seed)),
    }

    frame_spec = scenario.sources.frame_spec
    if scenario.sources.distribution == SourceDistribution.FRAMED_COMM and frame_spec is not None:
        parser[FRAMED_SECTION] = {
            'frame_length': str(frame_spec.frame_length),
            'sync_length': str(frame_spec.sync_length),
            'constellations': ', '.join(c.value for c in frame_spec.constellations),
            'stretch': StretchField().to_representation(frame_spec.stretch),
        }
    return parser


def dump_scenario(scenario: ScenarioConfig, path) -> Path:
    """Write a scenario as INI; the directory is created if needed."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with path.open('w', encoding='utf-8') as handle:
            scenario_to_parser(scenario).write(handle)
    except OSError as exc:
        raise OSError(f'Cannot write scenario to {path}: {exc}') from exc
    return path
