"""
Validation of scenario configuration sections.

Configuration files are plain INI text; every section arrives here as a dict
of strings. Lists are comma separated and angles are given in degrees.

Provides:
- FrameSpecSerializer for the [framed] section
- ScenarioSerializer for the [array_model] section
"""
import numpy as np
from rest_framework import serializers

from .exceptions import ConfigurationError
from .geometry import ArrayGeometry, OffsetVector
from .scenario import (
    MAX_SEED,
    Constellation,
    FrameSpec,
    NoiseDistribution,
    ScenarioConfig,
    SourceDistribution,
    SourceEnsemble,
    snr_to_sigma_v2,
)


class CommaSeparatedListField(serializers.ListField):
    """ListField that also accepts a single comma separated string."""

    def to_internal_value(self, data):
        if isinstance(data, str):
            data = [item.strip() for item in data.split(',') if item.strip()]
        return super().to_internal_value(data)


class StretchField(serializers.Field):
    """Per-source time stretch written as 'factor:offset' pairs, e.g. '1:1, 2:1, 3:2'."""

    default_error_messages = {
        'invalid': "Expected comma separated 'factor:offset' pairs.",
    }

    def to_internal_value(self, data):
        if isinstance(data, str):
            data = [item.strip() for item in data.split(',') if item.strip()]
        pairs = []
        try:
            for item in data:
                if isinstance(item, str):
                    factor, offset = item.split(':')
                else:
                    factor, offset = item
                pairs.append((int(factor), int(offset)))
        except (TypeError, ValueError):
            self.fail('invalid')
        return tuple(pairs)

    def to_representation(self, value):
        return ', '.join(f'{factor}:{offset}' for factor, offset in value)


class FrameSpecSerializer(serializers.Serializer):
    """
    Serializer for the frame layout of framed communication sources.

    Handles:
    - Frame and sync lengths (sync guard shorter than the frame)
    - One constellation and one stretch pair per source
    """

    frame_length = serializers.IntegerField(min_value=1, default=40)
    sync_length = serializers.IntegerField(min_value=2, default=8)
    constellations = CommaSeparatedListField(
        child=serializers.ChoiceField(choices=Constellation.choices),
        default=[Constellation.PSK8_OFDM, Constellation.PSK8_OFDM, Constellation.PAM4],
    )
    stretch = StretchField(default=((1, 1), (2, 1), (3, 2)))

    def validate(self, attrs):
        if attrs['sync_length'] >= attrs['frame_length']:
            raise serializers.ValidationError({
                'sync_length': 'Sync length must be shorter than the frame length.'
            })
        if len(attrs['stretch']) != len(attrs['constellations']):
            raise serializers.ValidationError({
                'stretch': 'One stretch pair is required per constellation.'
            })
        if any(factor < 1 for factor, _ in attrs['stretch']):
            raise serializers.ValidationError({
                'stretch': 'Stretch factors must be positive.'
            })
        return attrs

    def create(self, validated_data):
        return FrameSpec(
            frame_length=validated_data['frame_length'],
            sync_length=validated_data['sync_length'],
            constellations=tuple(validated_data['constellations']),
            stretch=validated_data['stretch'],
        )


class ScenarioSerializer(serializers.Serializer):
    """
    Serializer for a full scenario.

    Handles:
    - Array geometry and per-sensor offsets (phases in degrees)
    - Source azimuths (degrees), powers and distribution
    - Noise levels, given either as sigma_v2 or as snr_db
    - Sample size and seed

    A framed-comm scenario needs a FrameSpec in the serializer context under
    'frame_spec'.
    """

    num_sensors = serializers.IntegerField(min_value=2)
    spacing_over_wavelength = serializers.FloatField(default=0.5)
    azimuths = CommaSeparatedListField(child=serializers.FloatField(), min_length=1)
    powers = CommaSeparatedListField(child=serializers.FloatField(), required=False)
    distribution = serializers.ChoiceField(
        choices=SourceDistribution.choices,
        default=SourceDistribution.CIRCULAR_NORMAL,
    )
    gains = CommaSeparatedListField(child=serializers.FloatField(), required=False)
    phases = CommaSeparatedListField(child=serializers.FloatField(), required=False)
    sigma_v2 = serializers.FloatField(min_value=0.0, required=False)
    snr_db = serializers.FloatField(required=False)
    sigma_w2 = serializers.FloatField(min_value=0.0, default=0.0)
    noise_distribution = serializers.ChoiceField(
        choices=NoiseDistribution.choices,
        default=NoiseDistribution.CIRCULAR_NORMAL,
    )
    sample_size = serializers.IntegerField(min_value=1, default=750)
    seed = serializers.IntegerField(min_value=0, max_value=MAX_SEED, default=0)

    def validate_spacing_over_wavelength(self, value):
        if value <= 0:
            raise serializers.ValidationError('Sensor spacing must be positive.')
        return value

    def validate_powers(self, value):
        if any(power <= 0 for power in value):
            raise serializers.ValidationError('Source powers must be positive.')
        return value

    def validate_gains(self, value):
        if any(gain <= 0 for gain in value):
            raise serializers.ValidationError('All sensor gains must be positive.')
        return value

    def validate_phases(self, value):
        if any(abs(phase) >= 180.0 for phase in value):
            raise serializers.ValidationError('Phase offsets must lie strictly inside (-180, 180) degrees.')
        return value

    def validate(self, attrs):
        """
        Object-level validation.

        - Offsets default to the identity, must match the sensor count and
          keep the reference gain 1 and reference phases 0
        - Powers default to unit power and must match the source count
        - Exactly one of sigma_v2 and snr_db
        """
        M = attrs['num_sensors']
        N = len(attrs['azimuths'])
        errors = {}

        attrs.setdefault('gains', [1.0] * M)
        attrs.setdefault('phases', [0.0] * M)
        attrs.setdefault('powers', [1.0] * N)

        if len(attrs['gains']) != M:
            errors['gains'] = f'Expected {M} gains, got {len(attrs["gains"])}.'
        elif abs(attrs['gains'][0] - 1.0) > 1e-12:
            errors['gains'] = 'The first gain is the reference and must be 1.'
        if len(attrs['phases']) != M:
            errors['phases'] = f'Expected {M} phases, got {len(attrs["phases"])}.'
        elif any(abs(phase) > 1e-10 for phase in attrs['phases'][:2]):
            errors['phases'] = 'The first two phases are the reference and must be 0.'
        if len(attrs['powers']) != N:
            errors['powers'] = f'Expected {N} powers, got {len(attrs["powers"])}.'
        if N >= M - 1:
            errors['azimuths'] = f'The number of sources must be below M - 1 = {M - 1}.'
        elif len(set(attrs['azimuths'])) != N:
            errors['azimuths'] = 'Source azimuths must be distinct.'

        if 'snr_db' in attrs and 'sigma_v2' in attrs:
            errors['snr_db'] = 'Give either snr_db or sigma_v2, not both.'
        elif 'snr_db' in attrs:
            attrs['sigma_v2'] = snr_to_sigma_v2(attrs.pop('snr_db'))
        else:
            attrs.setdefault('sigma_v2', 0.1)

        if attrs.get('distribution') == SourceDistribution.FRAMED_COMM and self.context.get('frame_spec') is None:
            errors['distribution'] = 'Framed sources need a [framed] section.'

        if errors:
            raise serializers.ValidationError(errors)
        return attrs

    def create(self, validated_data):
        frame_spec = self.context.get('frame_spec')
        distribution = SourceDistribution(validated_data['distribution'])
        try:
            return ScenarioConfig(
                geometry=ArrayGeometry(
                    validated_data['num_sensors'],
                    validated_data['spacing_over_wavelength'],
                ),
                sources=SourceEnsemble(
                    azimuths=np.deg2rad(validated_data['azimuths']),
                    powers=validated_data['powers'],
                    distribution=distribution,
                    frame_spec=frame_spec if distribution == SourceDistribution.FRAMED_COMM else None,
                ),
                offsets=OffsetVector(
                    gains=validated_data['gains'],
                    phases=np.deg2rad(validated_data['phases']),
                ),
                sigma_v2=validated_data['sigma_v2'],
                sigma_w2=validated_data['sigma_w2'],
                sample_size=validated_data['sample_size'],
                seed=validated_data['seed'],
                noise_distribution=validated_data['noise_distribution'],
            )
        except ConfigurationError as exc:
            raise serializers.ValidationError(exc.errors or str(exc))
