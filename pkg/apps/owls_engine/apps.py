from django.apps import AppConfig


class OwlsEngineConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'owls_engine'
