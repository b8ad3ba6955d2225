"""
Persisted experiment runs and their result rows.

Running with --record stores the run and every CSV row so sweeps can be
compared across seeds and configurations from the admin.
"""
import math

from django.core.exceptions import ValidationError
from django.core.validators import MaxValueValidator, MinValueValidator
from django.db import models, transaction

from .experiments import ExperimentId, SweepAxis


class ExperimentRun(models.Model):
    """
    One invocation of the Monte Carlo harness.
    """

    experiment_id = models.CharField(
        max_length=40,
        choices=ExperimentId.choices,
        help_text="Experiment that was run"
    )

    # seeds cover the full unsigned 64-bit range
    master_seed = models.DecimalField(
        max_digits=20,
        decimal_places=0,
        validators=[MinValueValidator(0), MaxValueValidator(2**64 - 1)],
        help_text="Master seed of the trial generators"
    )

    trials = models.PositiveIntegerField(
        validators=[MinValueValidator(1)],
        help_text="Trials per sweep point"
    )

    threads = models.PositiveIntegerField(
        default=1,
        validators=[MinValueValidator(1)],
        help_text="Worker processes used"
    )

    config_path = models.CharField(
        max_length=500,
        blank=True,
        help_text="Configuration file the run was loaded from"
    )

    output_path = models.CharField(
        max_length=500,
        blank=True,
        help_text="CSV file the results were written to"
    )

    unreliable = models.BooleanField(
        default=False,
        help_text="Designates whether any sweep point exceeded the invalid-trial threshold"
    )

    created_at = models.DateTimeField(
        auto_now_add=True,
        help_text="Timestamp when the run finished"
    )

    class Meta:
        verbose_name = 'experiment run'
        verbose_name_plural = 'experiment runs'
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['experiment_id'], name='calib_run_experiment_idx'),
        ]

    def __str__(self):
        return f"{self.experiment_id} (seed {self.master_seed}, {self.trials} trials)"

    def clean(self):
        errors = {}
        if self.master_seed is not None and (self.master_seed < 0 or self.master_seed > 2**64 - 1):
            errors['master_seed'] = 'Master seed must fit in an unsigned 64-bit integer.'
        if self.trials is not None and self.trials < 1:
            errors['trials'] = 'At least one trial is required.'
        if errors:
            raise ValidationError(errors)
        super().clean()

    @classmethod
    def record(cls, table, trials: int, threads: int = 1, config_path='', output_path=''):
        """Store a ResultTable and its rows in one transaction."""
        with transaction.atomic():
            run = cls(
                experiment_id=table.experiment_id,
                master_seed=table.master_seed,
                trials=trials,
                threads=threads,
                config_path=str(config_path or ''),
                output_path=str(output_path or ''),
                unreliable=table.unreliable,
            )
            run.full_clean()
            run.save()
            ResultRecord.objects.bulk_create([ResultRecord.from_row(run, row) for row in table])
        return run


class ResultRecord(models.Model):
    """
    One row of a result table.
    """

    run = models.ForeignKey(
        ExperimentRun,
        on_delete=models.CASCADE,
        related_name='results',
        help_text="Run this row belongs to"
    )

    method = models.CharField(max_length=40, help_text="Calibration method or oracle name")

    sweep_name = models.CharField(
        max_length=10,
        choices=SweepAxis.choices,
        help_text="Swept scenario axis"
    )

    sweep_value = models.FloatField(help_text="Value of the swept axis")

    parameter = models.CharField(max_length=20, help_text="Parameter or aggregate name")

    # NaN is stored as NULL
    mse = models.FloatField(null=True, blank=True, help_text="Mean squared error over valid trials")

    crlb = models.FloatField(null=True, blank=True, help_text="Cramer-Rao bound, when one applies")

    trials = models.PositiveIntegerField(help_text="Trials run at this sweep point")

    invalid = models.PositiveIntegerField(default=0, help_text="Trials that produced no estimate")

    class Meta:
        verbose_name = 'result record'
        verbose_name_plural = 'result records'
        ordering = ['run', 'method', 'sweep_value', 'parameter']
        indexes = [
            models.Index(fields=['run', 'method'], name='calib_result_run_method_idx'),
        ]

    def __str__(self):
        return f"{self.method} {self.parameter} @ {self.sweep_name}={self.sweep_value}"

    def clean(self):
        errors = {}
        if self.mse is not None and self.mse < 0:
            errors['mse'] = 'MSE must be non-negative.'
        if self.crlb is not None and self.crlb < 0:
            errors['crlb'] = 'A bound must be non-negative.'
        if self.invalid is not None and self.trials is not None and self.invalid > self.trials:
            errors['invalid'] = 'Invalid trials cannot exceed the trial count.'
        if errors:
            raise ValidationError(errors)
        super().clean()

    @classmethod
    def from_row(cls, run: ExperimentRun, row):
        return cls(
            run=run,
            method=row.method,
            sweep_name=row.sweep_name,
            sweep_value=float(row.sweep_value),
            parameter=row.parameter,
            mse=None if math.isnan(row.mse) else row.mse,
            crlb=None if row.crlb is None or math.isnan(row.crlb) else row.crlb,
            trials=row.trials,
            invalid=row.invalid,
        )
