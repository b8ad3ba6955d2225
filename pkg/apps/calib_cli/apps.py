from django.apps import AppConfig


class CalibCliConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'calib_cli'
