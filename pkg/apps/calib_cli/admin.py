"""
Django admin configuration for recorded experiment runs.
"""
from django.contrib import admin

from .models import ExperimentRun, ResultRecord


class ResultRecordInline(admin.TabularInline):
    model = ResultRecord
    extra = 0
    can_delete = False
    readonly_fields = ('method', 'sweep_name', 'sweep_value', 'parameter', 'mse', 'crlb', 'trials', 'invalid')


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    """Runs with their result rows inline."""

    list_display = (
        'experiment_id',
        'master_seed',
        'trials',
        'threads',
        'unreliable',
        'created_at',
    )

    list_filter = (
        'experiment_id',
        'unreliable',
        'created_at',
    )

    search_fields = ('experiment_id', 'config_path')

    ordering = ('-created_at',)

    readonly_fields = ('created_at',)

    inlines = [ResultRecordInline]


@admin.register(ResultRecord)
class ResultRecordAdmin(admin.ModelAdmin):
    list_display = ('run', 'method', 'sweep_value', 'parameter', 'mse', 'crlb', 'invalid')
    list_filter = ('method', 'parameter', 'sweep_name')
    search_fields = ('method', 'parameter')
