from django.apps import AppConfig


class LinalgCoreConfig(AppConfig):
    name = 'linalg_core'
    verbose_name = 'Dense linear algebra'
