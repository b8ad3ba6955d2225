"""
Cyclostationary digital communication sources.

Each source is a concatenation of frames. A frame opens with a short
synchronization guard (a +1, -1 pair followed by zeros) and carries one packet
of information symbols, either an 8-PSK OFDM block or real 4-PAM symbols.
Sources can be time-stretched to emulate different baud rates and frame
alignments.
"""
from __future__ import annotations

import logging

import numpy as np

from .exceptions import ConfigurationError
from .scenario import Constellation, FrameSpec, ScenarioConfig, SnapshotMatrix
from .synthesis import compose_snapshots

logger = logging.getLogger(__name__)

PSK8_ALPHABET = np.exp(2j * np.pi * np.arange(8) / 8)
# {+-1, +-3} scaled to zero mean and unit variance
PAM4_ALPHABET = np.array([-3.0, -1.0, 1.0, 3.0]) / np.sqrt(5.0)


def sync_prefix(frame_spec: FrameSpec) -> np.ndarray:
    """
    Known burst preamble [1, -1, 0, ..., 0].

    The pulse pair occupies the first two samples; it is not delayed by one
    leading zero.
    """
    prefix = np.zeros(frame_spec.sync_length, dtype=complex)
    prefix[0] = 1.0
    prefix[1] = -1.0
    return prefix


def draw_packets(constellation, num_frames: int, packet_length: int, rng: np.random.Generator) -> np.ndarray:
    """num_frames x packet_length unit-variance information samples."""
    constellation = Constellation(constellation)
    shape = (num_frames, packet_length)

    if constellation == Constellation.PSK8_OFDM:
        symbols = PSK8_ALPHABET[rng.integers(0, PSK8_ALPHABET.size, size=shape)]
        # the orthonormal inverse DFT keeps unit sample variance, no cyclic prefix
        return np.fft.ifft(symbols, axis=1, norm='ortho')
    if constellation == Constellation.PAM4:
        return PAM4_ALPHABET[rng.integers(0, PAM4_ALPHABET.size, size=shape)].astype(complex)

    raise ConfigurationError(f"Unsupported constellation '{constellation}'.")


def frame_sequence(frame_spec: FrameSpec, constellation, num_frames: int, rng: np.random.Generator) -> np.ndarray:
    """num_frames consecutive frames of one source, flattened."""
    frames = np.empty((num_frames, frame_spec.frame_length), dtype=complex)
    frames[:, :frame_spec.sync_length] = sync_prefix(frame_spec)
    frames[:, frame_spec.sync_length:] = draw_packets(constellation, num_frames, frame_spec.packet_length, rng)
    return frames.ravel()


def time_stretch(base: np.ndarray, sample_size: int, factor: int, offset: int) -> np.ndarray:
    """
    Output sample t = 1..T is base[floor((t - offset) / factor)].

    Indices before the first base sample produce zeros.
    """
    t = np.arange(1, sample_size + 1)
    index = np.floor_divide(t - offset, factor)
    stretched = np.zeros(sample_size, dtype=complex)
    valid = index >= 0
    stretched[valid] = base[index[valid]]
    return stretched


def framed_source_power(frame_spec: FrameSpec, power: float = 1.0) -> float:
    """Expected per-sample power of a framed source: the sync pair plus a unit-variance packet."""
    return float(power) * (2.0 + frame_spec.packet_length) / frame_spec.frame_length


def draw_framed_sources(scenario: ScenarioConfig, frame_spec: FrameSpec, rng: np.random.Generator) -> np.ndarray:
    """N x T framed source waveforms scaled by the source powers."""
    T = scenario.sample_size
    if T % frame_spec.frame_length:
        raise ConfigurationError(
            'Invalid framed scenario.',
            {'sample_size': f'Sample size {T} is not a multiple of the frame length {frame_spec.frame_length}.'},
        )

    sources = scenario.sources
    waveforms = np.empty((sources.num_sources, T), dtype=complex)
    for n, (constellation, (factor, offset)) in enumerate(zip(frame_spec.constellations, frame_spec.stretch)):
        base_length = -(-T // factor)
        num_frames = -(-base_length // frame_spec.frame_length)
        base = frame_sequence(frame_spec, constellation, num_frames, rng)
        waveforms[n] = np.sqrt(sources.powers[n]) * time_stretch(base, T, factor, offset)
    return waveforms


def synthesize_framed(scenario: ScenarioConfig, frame_spec: FrameSpec, rng: np.random.Generator | None = None) -> SnapshotMatrix:
    """
    Snapshots for framed communication sources under the extended model.

    Framed sources are neither stationary nor proper; they are used to stress
    the estimators outside the conditions their optimality rests on.

    Raises:
        ConfigurationError: If T is not a multiple of the frame length or the
            frame specification does not cover every source.
    """
    if len(frame_spec.constellations) != scenario.sources.num_sources:
        raise ConfigurationError(
            'Invalid framed scenario.',
            {'frame_spec': 'One constellation is required per source.'},
        )
    if rng is None:
        rng = np.random.default_rng(int(scenario.seed))

    waveforms = draw_framed_sources(scenario, frame_spec, rng)
    logger.debug(
        'Framed sources: %d frames of %d samples, packets of %d',
        scenario.sample_size // frame_spec.frame_length, frame_spec.frame_length, frame_spec.packet_length,
    )
    data = compose_snapshots(scenario, waveforms, rng)
    return SnapshotMatrix(data, scenario=scenario, model='extended/framed-comm')
