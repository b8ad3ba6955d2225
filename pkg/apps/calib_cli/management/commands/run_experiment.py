"""
python manage.py run_experiment --experiment mse-vs-T --out results/mse-vs-T.csv

Exit codes: 0 on success, 2 on a configuration error, 3 when any sweep point
is unreliable (the CSV is still written).
"""
import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from array_model.exceptions import ConfigurationError
from array_model.scenario import MAX_SEED
from calib_cli.experiments import load_experiment
from calib_cli.models import ExperimentRun
from calib_cli.results import emit_csv
from calib_cli.runner import run_experiment

logger = logging.getLogger('calib_cli.runner')

CONFIG_ERROR = 2
UNRELIABLE = 3


def seed_value(text):
    value = int(text)
    if not 0 <= value <= MAX_SEED:
        raise ValueError(text)
    return value


class Command(BaseCommand):
    help = 'Run a Monte Carlo calibration experiment and write its results as CSV.'

    def add_arguments(self, parser):
        parser.add_argument('--config', help='Experiment INI file; defaults to the bundled file for --experiment.')
        parser.add_argument('--experiment', help='Experiment id; overrides the one in the file.')
        parser.add_argument('--out', help='Output CSV path; defaults to CALIB_RESULTS_DIR/<experiment>.csv.')
        parser.add_argument('--trials', type=int, help='Trials per sweep point.')
        parser.add_argument('--seed', type=seed_value, help='Master seed (unsigned 64-bit).')
        parser.add_argument('--threads', type=int, help='Worker processes; defaults to CALIB_THREADS.')
        parser.add_argument('--record', action='store_true', help='Store the run in the database.')
        parser.add_argument('--extended', action='store_true', help='Add mse_deg2, std_error and unreliable columns.')
        parser.add_argument('--debug-trials', dest='debug_trials', help='Write every per-trial squared error here.')

    def handle(self, *args, **options):
        if not options['config'] and not options['experiment']:
            raise CommandError('Give --experiment, --config or both.', returncode=CONFIG_ERROR)

        try:
            spec = load_experiment(options['config'], options['experiment'])
            overrides = {}
            if options['trials'] is not None:
                overrides['trials'] = options['trials']
            if options['seed'] is not None:
                overrides['master_seed'] = options['seed']
            if overrides:
                spec = spec.replace(**overrides)
        except ConfigurationError as exc:
            raise CommandError(str(exc), returncode=CONFIG_ERROR) from exc

        threads = options['threads'] if options['threads'] is not None else settings.CALIB_THREADS
        if threads < 1:
            raise CommandError('--threads must be at least 1.', returncode=CONFIG_ERROR)
        out = Path(options['out']) if options['out'] else Path(settings.CALIB_RESULTS_DIR) / f'{spec.experiment_id.value}.csv'

        table = run_experiment(spec, threads=threads, debug_path=options['debug_trials'])
        try:
            emit_csv(table, out, extended=options['extended'])
        except OSError as exc:
            raise CommandError(str(exc)) from exc
        logger.info('Wrote %d rows to %s', len(table), out)

        if options['record']:
            run = ExperimentRun.record(
                table, spec.trials, threads=threads, config_path=options['config'] or '', output_path=out,
            )
            self.stdout.write(f'Recorded run {run.pk}')

        self.stdout.write(self.style.SUCCESS(f'{spec.experiment_id.value}: {len(table)} rows written to {out}'))
        if table.unreliable:
            raise CommandError(
                f'More than {settings.CALIB_UNRELIABLE_FRACTION:.0%} of the trials were invalid at some sweep point.',
                returncode=UNRELIABLE,
            )
