"""
Test suite for the Monte Carlo sweep runner.
"""
import csv
import math
from collections import defaultdict

import numpy as np
import pytest

from array_model.exceptions import MeasurementError
from calib_cli.experiments import ExperimentId, SweepAxis
from calib_cli.oracles import ORACLE_METHOD
from calib_cli.runner import run_experiment, scored_parameters, trial_payloads
from owls_engine.estimates import CalibrationMethod
from owls_engine.solvers import calibrate
from tests.factories import ScenarioFactory


def failing(method_to_fail, failures=None):
    """calibrate that raises for one method, on every call or on the first `failures` calls."""
    calls = {'count': 0}

    def patched(snapshots, method, **kwargs):
        if method == method_to_fail:
            calls['count'] += 1
            if failures is None or calls['count'] <= failures:
                raise MeasurementError('Zero covariance entry; its logarithm is undefined.')
        return calibrate(snapshots, method, **kwargs)

    return patched


@pytest.mark.integration
class TestRunExperiment:
    """Test sweeps end to end."""

    def test_row_count(self, experiment_spec_factory):
        """Should emit every parameter plus the gains and phases aggregates per method and sweep point."""
        spec = experiment_spec_factory(trials=4)
        table = run_experiment(spec, threads=1)

        assert len(table) == 2 * 2 * (4 + 3 + 2)
        assert table.methods == ['ML-OWLS', 'LS']
        assert {row.parameter for row in table} >= {'gains', 'phases', 'psi_2', 'phi_5'}

    def test_deterministic(self, experiment_spec_factory):
        """Should reproduce the same MSEs from the same seed."""
        spec = experiment_spec_factory(trials=5)
        first = [row.mse for row in run_experiment(spec, threads=1)]
        second = [row.mse for row in run_experiment(spec, threads=1)]
        assert first == second

    def test_seed_changes_results(self, experiment_spec_factory):
        """Should draw different trials for another master seed."""
        spec = experiment_spec_factory(trials=5)
        first = [row.mse for row in run_experiment(spec, threads=1)]
        second = [row.mse for row in run_experiment(spec.replace(master_seed=4321), threads=1)]
        assert first != second

    def test_sweep_points_share_trial_seeds(self, experiment_spec_factory):
        """Should give trial i the same (master seed, i) stream at every sweep point."""
        spec = experiment_spec_factory(trials=3)
        seeds = [
            [(payload[2], payload[3]) for payload in trial_payloads(spec, spec.scenario.replace(sample_size=T))]
            for T in spec.sweep_values
        ]
        assert seeds[0] == seeds[1] == [(1234, 0), (1234, 1), (1234, 2)]

    def test_worker_count_does_not_change_results(self, experiment_spec_factory):
        """Should give identical rows with one or two worker processes."""
        spec = experiment_spec_factory(trials=6, sweep_values=(400,))
        serial = run_experiment(spec, threads=1)
        parallel = run_experiment(spec, threads=2)

        assert [row.mse for row in serial] == [row.mse for row in parallel]

    def test_bounds_attached(self, experiment_spec_factory):
        """Should attach the bound to every gain and phase row."""
        table = run_experiment(experiment_spec_factory(trials=3), threads=1)

        assert all(row.crlb is not None and row.crlb > 0 for row in table)
        psi_rows = table.select(method='ML-OWLS', parameter='psi_2')
        assert psi_rows[0].crlb > psi_rows[1].crlb

    def test_aggregate_is_parameter_mean(self, experiment_spec_factory):
        """Should average the member rows for gains and phases."""
        table = run_experiment(experiment_spec_factory(trials=4, sweep_values=(400,)), threads=1)
        gains = table.select(method='LS', parameter='gains')[0]
        members = [row for row in table.select(method='LS') if row.parameter.startswith('psi_')]

        assert gains.mse == pytest.approx(np.mean([row.mse for row in members]), rel=1e-12)
        assert gains.crlb == pytest.approx(np.mean([row.crlb for row in members]), rel=1e-12)

    def test_snr_sweep(self, experiment_spec_factory):
        """Should sweep the SNR with sweep_value in dB."""
        spec = experiment_spec_factory(
            experiment_id=ExperimentId.MSE_VS_SNR, sweep_name=SweepAxis.SNR, sweep_values=(0.0, 20.0), trials=3,
        )
        table = run_experiment(spec, threads=1)

        assert {row.sweep_value for row in table} == {0.0, 20.0}
        assert all(row.sweep_name == 'snr_db' for row in table)

    def test_doa_rows_have_no_bound(self, experiment_spec_factory):
        """Should score doa_n and the doa aggregate without a bound."""
        spec = experiment_spec_factory(
            experiment_id=ExperimentId.DOA_VS_T,
            scenario=ScenarioFactory(sources__azimuths=np.deg2rad([-35.0, -73.0])),
            sweep_values=(1000,),
            trials=3,
            methods=(CalibrationMethod.ORACLE, CalibrationMethod.ML_OWLS),
        )
        table = run_experiment(spec, threads=1)

        assert scored_parameters(spec) == ['doa_1', 'doa_2']
        assert len(table) == 2 * 3
        assert all(row.crlb is None for row in table)


@pytest.mark.integration
class TestInvalidTrials:
    """Test the handling of failed trials."""

    def test_all_trials_invalid(self, experiment_spec_factory, monkeypatch):
        """Should report NaN MSEs, the invalid count and unreliability for the failing method."""
        monkeypatch.setattr('calib_cli.trials.calibrate', failing(CalibrationMethod.LS))
        table = run_experiment(experiment_spec_factory(trials=4, sweep_values=(400,)), threads=1)

        ls_rows = table.select(method='LS')
        assert all(math.isnan(row.mse) and row.invalid == 4 and row.unreliable for row in ls_rows)
        assert not any(row.unreliable for row in table.select(method='ML-OWLS'))
        assert table.unreliable

    @pytest.mark.parametrize('failures, unreliable', [(3, False), (5, True)])
    def test_unreliable_threshold(self, experiment_spec_factory, monkeypatch, failures, unreliable):
        """Should mark a sweep point unreliable above 20 percent invalid trials."""
        monkeypatch.setattr('calib_cli.trials.calibrate', failing(CalibrationMethod.LS, failures))
        table = run_experiment(experiment_spec_factory(trials=20, sweep_values=(400,)), threads=1)
        row = table.select(method='LS', parameter='gains')[0]

        assert row.invalid == failures
        assert row.unreliable is unreliable
        assert math.isfinite(row.mse)


@pytest.mark.integration
class TestDebugTrials:
    """Test the per-trial debug output."""

    def test_debug_rows_average_to_table(self, experiment_spec_factory, tmp_path):
        """Should write squared errors whose means reproduce the aggregated MSE."""
        path = tmp_path / 'trials.csv'
        spec = experiment_spec_factory(trials=5)
        table = run_experiment(spec, threads=1, debug_path=path)

        grouped = defaultdict(list)
        with path.open(newline='') as handle:
            for record in csv.DictReader(handle):
                key = (record['method'], float(record['sweep_value']), record['parameter'])
                grouped[key].append(float(record['squared_error']))

        assert len(grouped) == 2 * 2 * 7
        for row in table:
            if row.parameter in ('gains', 'phases'):
                continue
            values = grouped[(row.method, float(row.sweep_value), row.parameter)]
            assert len(values) == 5
            assert np.mean(values) == pytest.approx(row.mse, rel=1e-12)


@pytest.mark.integration
class TestOracleValidation:
    """Test the noise statistics oracle experiment."""

    def test_oracle_rows(self, experiment_spec_factory, scenario_factory):
        """Should report the three deviations per sample size."""
        scenario = scenario_factory(
            geometry__num_sensors=3,
            offsets__gains=np.array([1.0, 1.3, 1.1]),
            offsets__phases=np.deg2rad([0.0, 0.0, 5.0]),
            sources__azimuths=np.deg2rad([-35.0]),
        )
        spec = experiment_spec_factory(
            experiment_id=ExperimentId.ORACLE_VALIDATE, scenario=scenario,
            sweep_values=(5000,), trials=4000, methods=(),
        )
        table = run_experiment(spec, threads=1)

        assert [row.parameter for row in table] == ['eta', 'lambda', 'lambda_diag']
        assert all(row.method == ORACLE_METHOD and row.crlb is None for row in table)
        assert table.select(parameter='lambda_diag')[0].mse < 0.15
