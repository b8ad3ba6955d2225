"""
Monte Carlo sweeps: every sweep point runs the same seeded trials, squared
errors are averaged per method and parameter, and the bound is attached.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from django.conf import settings

from array_model.exceptions import DomainError, IdentifiabilityError
from array_model.synthesis import trial_rng
from bounds.crlb import crlb_report
from owls_engine.estimates import CalibrationMethod

from .experiments import ExperimentId, ExperimentSpec, NoiseCase
from .oracles import ORACLE_METHOD, noise_statistics_oracle
from .results import DOA_AGGREGATE, GAINS_AGGREGATE, PHASES_AGGREGATE, ResultRow, ResultTable, emit_debug_csv
from .trials import run_seeded_trial

logger = logging.getLogger(__name__)


def trial_payloads(spec: ExperimentSpec, scenario) -> list:
    return [
        (scenario, spec.methods, spec.master_seed, index, spec.noise_case, spec.is_doa)
        for index in range(spec.trials)
    ]


def run_trials(payloads: list, threads: int = 1) -> list:
    """Outcomes in trial order; a pool of processes when threads > 1."""
    if threads <= 1:
        return [run_seeded_trial(payload) for payload in payloads]
    chunksize = max(1, len(payloads) // (4 * threads))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run_seeded_trial, payloads, chunksize=chunksize))


def sweep_bounds(spec: ExperimentSpec, value, scenario) -> dict:
    """Per-parameter bounds at one sweep point; empty when no bound applies."""
    if spec.is_doa:
        return {}
    try:
        report = crlb_report(scenario, reduced=spec.noise_case == NoiseCase.REDUCED)
    except (DomainError, IdentifiabilityError) as exc:
        logger.warning('No bound at %s = %s: %s', spec.sweep_name.value, value, exc)
        return {}
    return report.parameter_bounds()


def scored_parameters(spec: ExperimentSpec) -> list[str]:
    """Names of the per-trial errors, in output order."""
    if spec.is_doa:
        return [f'doa_{n}' for n in range(1, spec.scenario.sources.num_sources + 1)]
    M = spec.scenario.num_sensors
    return [f'psi_{m}' for m in range(2, M + 1)] + [f'phi_{m}' for m in range(3, M + 1)]


def _aggregate_names(parameters) -> dict:
    groups = {
        GAINS_AGGREGATE: [p for p in parameters if p.startswith('psi_')],
        PHASES_AGGREGATE: [p for p in parameters if p.startswith('phi_')],
        DOA_AGGREGATE: [p for p in parameters if p.startswith('doa_')],
    }
    return {name: members for name, members in groups.items() if members}


def summarize_method(spec: ExperimentSpec, value, method, outcomes: list, bounds: dict) -> list[ResultRow]:
    """
    One row per parameter plus the 'gains'/'phases' (or 'doa') averages.

    A row's MSE averages over the valid trials only; an aggregate row takes
    the per-trial mean over its parameters and the mean of their bounds.
    """
    valid = [outcome for outcome in outcomes if outcome.valid]
    invalid = len(outcomes) - len(valid)
    unreliable = invalid / len(outcomes) > settings.CALIB_UNRELIABLE_FRACTION
    if unreliable:
        logger.warning(
            '%s at %s = %s: %d of %d trials invalid, marking unreliable',
            method.value, spec.sweep_name.value, value, invalid, len(outcomes),
        )
    parameters = scored_parameters(spec)
    errors = np.array([[outcome.squared_errors[p] for p in parameters] for outcome in valid], dtype=float)
    if not valid:
        # every row reports NaN when no trial survived
        errors = np.full((1, len(parameters)), np.nan)

    columns = [(p, errors[:, [k]], [bounds.get(p)]) for k, p in enumerate(parameters)]
    for name, members in _aggregate_names(parameters).items():
        indices = [parameters.index(p) for p in members]
        columns.append((name, errors[:, indices], [bounds.get(p) for p in members]))

    rows = []
    for name, block, member_bounds in columns:
        per_trial = block.mean(axis=1)
        std_error = float(per_trial.std(ddof=1) / np.sqrt(per_trial.size)) if per_trial.size > 1 else None
        crlb = None if None in member_bounds else float(np.mean(member_bounds))
        rows.append(ResultRow(
            method=method.value,
            sweep_name=spec.sweep_name.value,
            sweep_value=value,
            parameter=name,
            mse=float(per_trial.mean()),
            crlb=crlb,
            trials=len(outcomes),
            invalid=invalid,
            std_error=std_error,
            unreliable=unreliable,
        ))
    return rows


def debug_records(spec: ExperimentSpec, value, results: list):
    for trial, outcomes in enumerate(results):
        for method, outcome in outcomes.items():
            for parameter, squared_error in outcome.squared_errors.items():
                yield method.value, spec.sweep_name.value, value, trial, parameter, squared_error


def run_oracle_validation(spec: ExperimentSpec) -> ResultTable:
    """
    Rows for the noise statistics oracle at each sample size.

    The mse column carries the maximum relative deviation of eta, of Lambda
    and of Lambda's diagonal; trials is the replicate count.
    """
    table = ResultTable(spec.experiment_id.value, spec.master_seed)
    for index, value in enumerate(spec.sweep_values):
        report = noise_statistics_oracle(
            spec.scenario, int(value), spec.trials, trial_rng(spec.master_seed, index),
            reduced=spec.noise_case == NoiseCase.REDUCED,
        )
        for parameter, deviation in (
            ('eta', report.eta_max_rel_dev),
            ('lambda', report.lambda_max_rel_dev),
            ('lambda_diag', report.lambda_diag_max_rel_dev),
        ):
            table.append(ResultRow(
                method=ORACLE_METHOD,
                sweep_name=spec.sweep_name.value,
                sweep_value=value,
                parameter=parameter,
                mse=deviation,
                crlb=None,
                trials=report.replicates,
                invalid=report.invalid,
            ))
    return table


def run_experiment(spec: ExperimentSpec, threads: int | None = None, debug_path=None) -> ResultTable:
    """
    Run the whole sweep.

    Results depend only on the ExperimentSpec: trial i at every sweep point draws from
    (master_seed, i), whatever the worker count. Sweep points therefore share
    their random numbers, so their errors are correlated and a slope fitted
    across the sweep has less scatter than independent points would give.

    Args:
        spec: The experiment to run.
        threads: Worker processes; defaults to CALIB_THREADS.
        debug_path: Optional CSV receiving every per-trial squared error.
    """
    threads = settings.CALIB_THREADS if threads is None else threads
    logger.info(
        'Running %s: %d trials x %d sweep points, methods %s, %d worker(s)',
        spec.experiment_id.value, spec.trials, len(spec.sweep_values),
        ','.join(m.value for m in spec.methods), threads,
    )
    if spec.experiment_id == ExperimentId.ORACLE_VALIDATE:
        return run_oracle_validation(spec)

    table = ResultTable(spec.experiment_id.value, spec.master_seed)
    records = []
    for value in spec.sweep_values:
        scenario = spec.scenario_at(value)
        results = run_trials(trial_payloads(spec, scenario), threads)
        bounds = sweep_bounds(spec, value, scenario)
        for method in spec.methods:
            method = CalibrationMethod(method)
            outcomes = [trial[method] for trial in results]
            for row in summarize_method(spec, value, method, outcomes, bounds):
                table.append(row)
        if debug_path is not None:
            records.extend(debug_records(spec, value, results))
        logger.debug('%s = %s done', spec.sweep_name.value, value)

    if debug_path is not None:
        emit_debug_csv(records, debug_path)
    return table
