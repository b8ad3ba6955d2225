from django.apps import AppConfig


class DoaMusicConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'doa_music'
