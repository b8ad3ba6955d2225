"""
Snapshot synthesis for the offset-affected ULA model.

    r_w[t] = Psi Phi (A s[t] + v[t]) + w[t]

Every function takes an explicit numpy Generator; the same seed always yields
the same snapshots bit for bit.
"""
from __future__ import annotations

import numpy as np

from .exceptions import ConfigurationError
from .geometry import manifold_matrix
from .scenario import NoiseDistribution, ScenarioConfig, SnapshotMatrix, SourceDistribution

# Real-valued draws are standardized to zero mean and unit variance, then
# scaled so that each of the real and imaginary parts carries half the power.
HALF_POWER = np.sqrt(0.5)


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent generator for one Monte Carlo trial, independent of scheduling."""
    sequence = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(trial_index),))
    return np.random.default_rng(sequence)


def scenario_rng(scenario: ScenarioConfig) -> np.random.Generator:
    return np.random.default_rng(int(scenario.seed))


def circular_normal(rng: np.random.Generator, shape, variance=1.0) -> np.ndarray:
    """Circular complex normal draws with E|z|^2 = variance."""
    scale = np.sqrt(np.asarray(variance, dtype=float) / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _standardized_real(rng: np.random.Generator, distribution, shape) -> np.ndarray:
    if distribution == SourceDistribution.BERNOULLI:
        # Bernoulli(0.5) has mean 1/2 and standard deviation 1/2
        return (rng.integers(0, 2, size=shape) - 0.5) / 0.5
    if distribution == SourceDistribution.LAPLACE:
        # Laplace(0, 1) has variance 2
        return rng.laplace(0.0, 1.0, size=shape) / np.sqrt(2.0)
    if distribution == NoiseDistribution.UNIFORM:
        # Uniform(-sqrt(3), sqrt(3)) has unit variance
        return rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), size=shape)
    raise ConfigurationError(f"No real-valued sampler for distribution '{distribution}'.")


def draw_sources(scenario: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    """N x T source waveforms for the i.i.d. source distributions."""
    sources = scenario.sources
    shape = (sources.num_sources, scenario.sample_size)
    powers = sources.powers[:, None]

    if sources.distribution == SourceDistribution.CIRCULAR_NORMAL:
        return circular_normal(rng, shape, powers)
    if sources.distribution == SourceDistribution.FRAMED_COMM:
        raise ConfigurationError('Framed sources are generated by synthesize_framed.')

    real = _standardized_real(rng, sources.distribution, shape)
    imag = _standardized_real(rng, sources.distribution, shape)
    return np.sqrt(powers) * HALF_POWER * (real + 1j * imag)


def draw_sensor_noise(scenario: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    """M x T noise v[t] that passes through the sensor offsets."""
    shape = (scenario.num_sensors, scenario.sample_size)
    if scenario.noise_distribution == NoiseDistribution.UNIFORM:
        real = _standardized_real(rng, NoiseDistribution.UNIFORM, shape)
        imag = _standardized_real(rng, NoiseDistribution.UNIFORM, shape)
        return np.sqrt(scenario.sigma_v2) * HALF_POWER * (real + 1j * imag)
    return circular_normal(rng, shape, scenario.sigma_v2)


def compose_snapshots(scenario: ScenarioConfig, source_waveforms: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Apply the manifold, the offset-affected noise, the offsets and the internal noise."""
    A = manifold_matrix(scenario.sources.azimuths, scenario.geometry)
    x = A @ source_waveforms + draw_sensor_noise(scenario, rng)
    r = scenario.offsets.as_diagonal()[:, None] * x
    if scenario.sigma_w2 > 0:
        r = r + circular_normal(rng, r.shape, scenario.sigma_w2)
    return r


def synthesize(scenario: ScenarioConfig, rng: np.random.Generator | None = None) -> SnapshotMatrix:
    """
    Synthesize M x T snapshots for a scenario.

    Draw order is fixed (sources, then v[t], then w[t]) so a given generator
    state always produces the same snapshots. Framed communication sources
    are delegated to synthesize_framed.

    Raises:
        ConfigurationError: If the scenario cannot be synthesized.
    """
    if rng is None:
        rng = scenario_rng(scenario)

    if scenario.sources.distribution == SourceDistribution.FRAMED_COMM:
        from .framed import synthesize_framed
        return synthesize_framed(scenario, scenario.sources.frame_spec, rng)

    waveforms = draw_sources(scenario, rng)
    data = compose_snapshots(scenario, waveforms, rng)
    model = 'extended' if scenario.sigma_w2 > 0 else 'pure'
    return SnapshotMatrix(data, scenario=scenario, model=f'{model}/{scenario.sources.distribution.value}')
