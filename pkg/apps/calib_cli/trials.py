"""
One Monte Carlo trial: synthesize, calibrate with every method, score.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from array_model.exceptions import (
    CalibrationWarning,
    DomainError,
    IdentifiabilityError,
    MeasurementError,
    SingularWeightError,
)
from array_model.scenario import ScenarioConfig
from array_model.synthesis import synthesize, trial_rng
from doa_music.music import estimate_doas, match_to_truth
from owls_engine.estimates import CalibrationMethod
from owls_engine.solvers import calibrate

from .experiments import NoiseCase

logger = logging.getLogger(__name__)

# failures that invalidate a trial without stopping the run
TRIAL_FAILURES = (MeasurementError, SingularWeightError, IdentifiabilityError)


@dataclass
class MethodOutcome:
    """Squared errors per parameter, or the reason the trial is invalid."""
    squared_errors: dict = field(default_factory=dict)
    invalid_reason: str | None = None

    @property
    def valid(self) -> bool:
        return self.invalid_reason is None


def calibration_kwargs(scenario: ScenarioConfig, method: CalibrationMethod, noise_case: NoiseCase) -> dict:
    if method == CalibrationMethod.ORACLE:
        return {}
    if noise_case == NoiseCase.KNOWN:
        return {'sigma_w2': scenario.sigma_w2}
    if noise_case == NoiseCase.ESTIMATED:
        return {'num_sources': scenario.sources.num_sources}
    if noise_case == NoiseCase.REDUCED and method == CalibrationMethod.LS:
        return {'reduced': True}
    return {}


def offset_squared_errors(estimate, scenario: ScenarioConfig) -> dict:
    """(psi_hat - psi)^2 for sensors 2..M and (phi_hat - phi)^2 in rad^2 for sensors 3..M."""
    gains = estimate.gain_errors(scenario.offsets.gains) ** 2
    phases = estimate.phase_errors(scenario.offsets.phases) ** 2
    errors = {f'psi_{m}': float(e) for m, e in enumerate(gains, start=2)}
    errors.update({f'phi_{m}': float(e) for m, e in enumerate(phases, start=3)})
    return errors


def run_trial(scenario: ScenarioConfig, methods, trial_seed, *, noise_case=NoiseCase.PURE, doa: bool = False) -> dict:
    """
    Run one trial for every method on a shared set of snapshots.

    trial_seed is anything np.random.default_rng accepts; the runner passes a
    (master seed, trial index) SeedSequence.

    Returns:
        method -> MethodOutcome. DOA trials score 'doa_n' squared errors in
        degrees^2; calibration trials score the identifiable gains and phases.
    """
    rng = trial_seed if isinstance(trial_seed, np.random.Generator) else np.random.default_rng(trial_seed)
    snapshots = synthesize(scenario, rng)
    noise_case = NoiseCase(noise_case)

    outcomes = {}
    for method in methods:
        method = CalibrationMethod(method)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter('ignore', CalibrationWarning)
                estimate = calibrate(snapshots, method, **calibration_kwargs(scenario, method, noise_case))
                if doa:
                    outcomes[method] = _doa_outcome(snapshots, estimate, scenario)
                else:
                    outcomes[method] = MethodOutcome(offset_squared_errors(estimate, scenario))
        except (*TRIAL_FAILURES, DomainError) as exc:
            logger.debug('%s trial invalid: %s', method.value, exc)
            outcomes[method] = MethodOutcome(invalid_reason=f'{type(exc).__name__}: {exc}')
    return outcomes


def _doa_outcome(snapshots, estimate, scenario: ScenarioConfig) -> MethodOutcome:
    num_sources = scenario.sources.num_sources
    doa = estimate_doas(snapshots, estimate, num_sources)
    if doa.detection_failed:
        return MethodOutcome(invalid_reason='detection failed')
    errors = match_to_truth(doa.angles, scenario.sources.azimuths)
    return MethodOutcome({f'doa_{n}': float(e) ** 2 for n, e in enumerate(errors, start=1)})


def run_seeded_trial(payload) -> dict:
    """Process-pool entry point: (scenario, methods, master_seed, trial_index, noise_case, doa)."""
    scenario, methods, master_seed, trial_index, noise_case, doa = payload
    return run_trial(scenario, methods, trial_rng(master_seed, trial_index), noise_case=noise_case, doa=doa)
