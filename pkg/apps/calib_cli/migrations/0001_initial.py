# Generated by Django 6.0 on 2026-10-19 10:12

import django.core.validators
import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('experiment_id', models.CharField(choices=[('mse-vs-T', 'MSE vs sample size'), ('mse-vs-snr', 'MSE vs SNR'), ('nongaussian-mse-vs-T', 'Non-Gaussian sources, MSE vs sample size'), ('framed-mse-vs-T', 'Framed communication sources, MSE vs sample size'), ('doa-vs-T', 'Post-calibration DOA vs sample size'), ('doa-vs-snr', 'Post-calibration DOA vs SNR'), ('oracle-validate', 'Noise statistics oracle'), ('extended-cases', 'Known vs estimated internal noise')], help_text='Experiment that was run', max_length=40)),
                ('master_seed', models.DecimalField(decimal_places=0, help_text='Master seed of the trial generators', max_digits=20, validators=[django.core.validators.MinValueValidator(0), django.core.validators.MaxValueValidator(18446744073709551615)])),
                ('trials', models.PositiveIntegerField(help_text='Trials per sweep point', validators=[django.core.validators.MinValueValidator(1)])),
                ('threads', models.PositiveIntegerField(default=1, help_text='Worker processes used', validators=[django.core.validators.MinValueValidator(1)])),
                ('config_path', models.CharField(blank=True, help_text='Configuration file the run was loaded from', max_length=500)),
                ('output_path', models.CharField(blank=True, help_text='CSV file the results were written to', max_length=500)),
                ('unreliable', models.BooleanField(default=False, help_text='Designates whether any sweep point exceeded the invalid-trial threshold')),
                ('created_at', models.DateTimeField(auto_now_add=True, help_text='Timestamp when the run finished')),
            ],
            options={
                'verbose_name': 'experiment run',
                'verbose_name_plural': 'experiment runs',
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['experiment_id'], name='calib_run_experiment_idx')],
            },
        ),
        migrations.CreateModel(
            name='ResultRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('method', models.CharField(help_text='Calibration method or oracle name', max_length=40)),
                ('sweep_name', models.CharField(choices=[('T', 'Sample size'), ('snr_db', 'SNR [dB]')], help_text='Swept scenario axis', max_length=10)),
                ('sweep_value', models.FloatField(help_text='Value of the swept axis')),
                ('parameter', models.CharField(help_text='Parameter or aggregate name', max_length=20)),
                ('mse', models.FloatField(blank=True, help_text='Mean squared error over valid trials', null=True)),
                ('crlb', models.FloatField(blank=True, help_text='Cramer-Rao bound, when one applies', null=True)),
                ('trials', models.PositiveIntegerField(help_text='Trials run at this sweep point')),
                ('invalid', models.PositiveIntegerField(default=0, help_text='Trials that produced no estimate')),
                ('run', models.ForeignKey(help_text='Run this row belongs to', on_delete=django.db.models.deletion.CASCADE, related_name='results', to='calib_cli.experimentrun')),
            ],
            options={
                'verbose_name': 'result record',
                'verbose_name_plural': 'result records',
                'ordering': ['run', 'method', 'sweep_value', 'parameter'],
                'indexes': [models.Index(fields=['run', 'method'], name='calib_result_run_method_idx')],
            },
        ),
    ]
