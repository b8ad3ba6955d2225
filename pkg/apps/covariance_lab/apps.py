from django.apps import AppConfig


class CovarianceLabConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'covariance_lab'
