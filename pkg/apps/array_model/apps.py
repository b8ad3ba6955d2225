from django.apps import AppConfig


class ArrayModelConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'array_model'
