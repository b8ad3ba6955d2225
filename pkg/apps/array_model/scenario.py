"""
Generative description of a calibration experiment.

A ScenarioConfig fixes everything needed to synthesize snapshots: array
geometry, sources, sensor offsets, the two noise levels and the sample size.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
from django.db import models

from .exceptions import ConfigurationError
from .geometry import ArrayGeometry, OffsetVector

MAX_SEED = 2**64 - 1


class SourceDistribution(models.TextChoices):
    """Distribution of the source waveforms s[t]."""
    CIRCULAR_NORMAL = 'circular-complex-normal', 'Circular complex normal'
    BERNOULLI = 'bernoulli', 'Bernoulli (p = 0.5)'
    LAPLACE = 'laplace', 'Laplace'
    FRAMED_COMM = 'framed-comm', 'Framed digital communication'


class NoiseDistribution(models.TextChoices):
    """Distribution of the offset-affected sensor noise v[t]."""
    CIRCULAR_NORMAL = 'circular-complex-normal', 'Circular complex normal'
    UNIFORM = 'uniform', 'Uniform real and imaginary parts'


class Constellation(models.TextChoices):
    """Symbol packets carried by a framed source."""
    PSK8_OFDM = '8psk-ofdm', '8-PSK OFDM'
    PAM4 = '4pam', '4-PAM'


def snr_to_sigma_v2(snr_db: float) -> float:
    """Noise variance for unit-power sources: SNR[dB] = -10 log10(sigma_v2)."""
    return float(10.0 ** (-snr_db / 10.0))


def sigma_v2_to_snr(sigma_v2: float) -> float:
    return float(-10.0 * np.log10(sigma_v2))


@dataclass(frozen=True)
class FrameSpec:
    """
    Frame layout of cyclostationary communication sources.

    Each frame starts with sync_length synchronization samples followed by a
    packet of frame_length - sync_length information samples. stretch holds
    one (factor, offset) pair per source: output sample t (1-based) is the
    base sequence at floor((t - offset) / factor).
    """
    frame_length: int = 40
    sync_length: int = 8
    constellations: tuple = (Constellation.PSK8_OFDM, Constellation.PSK8_OFDM, Constellation.PAM4)
    stretch: tuple = ((1, 1), (2, 1), (3, 2))

    def __post_init__(self):
        object.__setattr__(self, 'constellations', tuple(Constellation(c) for c in self.constellations))
        object.__setattr__(self, 'stretch', tuple((int(f), int(o)) for f, o in self.stretch))

        errors = {}
        if self.frame_length < 1:
            errors['frame_length'] = 'Frame length must be positive.'
        if self.sync_length < 2 or self.sync_length >= self.frame_length:
            errors['sync_length'] = 'Sync length must be at least 2 and shorter than the frame.'
        if len(self.stretch) != len(self.constellations):
            errors['stretch'] = 'One stretch pair is required per source.'
        elif any(factor < 1 for factor, _ in self.stretch):
            errors['stretch'] = 'Stretch factors must be positive.'
        if errors:
            raise ConfigurationError('Invalid frame specification.', errors)

    @property
    def packet_length(self) -> int:
        return self.frame_length - self.sync_length


@dataclass(frozen=True, eq=False)
class SourceEnsemble:
    """N mutually uncorrelated narrowband sources."""
    azimuths: np.ndarray
    powers: np.ndarray
    distribution: SourceDistribution = SourceDistribution.CIRCULAR_NORMAL
    frame_spec: FrameSpec | None = None

    def __post_init__(self):
        azimuths = np.atleast_1d(np.asarray(self.azimuths, dtype=float))
        powers = np.atleast_1d(np.asarray(self.powers, dtype=float))
        object.__setattr__(self, 'azimuths', azimuths)
        object.__setattr__(self, 'powers', powers)
        object.__setattr__(self, 'distribution', SourceDistribution(self.distribution))

        errors = {}
        if azimuths.size < 1:
            errors['azimuths'] = 'At least one source is required.'
        elif np.unique(azimuths).size != azimuths.size:
            errors['azimuths'] = 'Source azimuths must be distinct.'
        if powers.shape != azimuths.shape:
            errors['powers'] = 'One power is required per source.'
        elif np.any(powers <= 0):
            errors['powers'] = 'Source powers must be positive.'
        if self.distribution == SourceDistribution.FRAMED_COMM:
            if self.frame_spec is None:
                errors['frame_spec'] = 'Framed sources need a frame specification.'
            elif len(self.frame_spec.constellations) != azimuths.size:
                errors['frame_spec'] = 'One constellation is required per source.'
        if errors:
            raise ConfigurationError('Invalid source ensemble.', errors)

    @property
    def num_sources(self) -> int:
        return self.azimuths.size


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    """
    Full generative description of one experiment point.

    sigma_v2 is the variance of the noise that passes through the sensor
    offsets; sigma_w2 is the variance of the internal noise added after them.
    The model without internal noise is the special case sigma_w2 = 0.
    """
    geometry: ArrayGeometry
    sources: SourceEnsemble
    offsets: OffsetVector
    sigma_v2: float = 0.1
    sigma_w2: float = 0.0
    sample_size: int = 750
    seed: int = 0
    noise_distribution: NoiseDistribution = NoiseDistribution.CIRCULAR_NORMAL

    def __post_init__(self):
        object.__setattr__(self, 'noise_distribution', NoiseDistribution(self.noise_distribution))

        errors = {}
        M = self.geometry.num_sensors
        if self.offsets.num_sensors != M:
            errors['offsets'] = f'Expected {M} gains and phases, got {self.offsets.num_sensors}.'
        elif not self.offsets.follows_reference_convention():
            # estimators only recover offsets relative to sensor 1 (gain) and sensors 1, 2 (phase)
            errors['offsets'] = 'Ground-truth offsets must satisfy psi_1 = 1 and phi_1 = phi_2 = 0.'
        if self.sources.num_sources >= M - 1:
            errors['sources'] = f'The number of sources must be below M - 1 = {M - 1}.'
        if self.sigma_v2 < 0:
            errors['sigma_v2'] = 'Noise variance cannot be negative.'
        if self.sigma_w2 < 0:
            errors['sigma_w2'] = 'Noise variance cannot be negative.'
        if int(self.sample_size) != self.sample_size or self.sample_size < 1:
            errors['sample_size'] = 'Sample size must be a positive integer.'
        if not 0 <= int(self.seed) <= MAX_SEED:
            errors['seed'] = 'Seed must be an unsigned 64-bit integer.'
        if errors:
            raise ConfigurationError('Invalid scenario.', errors)

    @property
    def num_sensors(self) -> int:
        return self.geometry.num_sensors

    @property
    def snr_db(self) -> float:
        return sigma_v2_to_snr(self.sigma_v2)

    def replace(self, **changes) -> ScenarioConfig:
        return dataclasses.replace(self, **changes)

    def with_snr(self, snr_db: float) -> ScenarioConfig:
        return self.replace(sigma_v2=snr_to_sigma_v2(snr_db))


@dataclass(frozen=True, eq=False)
class SnapshotMatrix:
    """M x T complex snapshots; the array is read-only once created."""
    data: np.ndarray
    scenario: ScenarioConfig | None = field(default=None, compare=False)
    model: str = 'unknown'

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        if data.ndim != 2:
            raise ConfigurationError('Snapshots must be an M x T matrix.')
        if not np.all(np.isfinite(data)):
            raise ConfigurationError('Snapshots contain non-finite entries.')
        if self.scenario is not None and data.shape != (self.scenario.num_sensors, self.scenario.sample_size):
            raise ConfigurationError(
                f'Snapshot shape {data.shape} does not match the scenario '
                f'({self.scenario.num_sensors} x {self.scenario.sample_size}).'
            )
        data.setflags(write=False)
        object.__setattr__(self, 'data', data)

    @property
    def num_sensors(self) -> int:
        return self.data.shape[0]

    @property
    def sample_size(self) -> int:
        return self.data.shape[1]
