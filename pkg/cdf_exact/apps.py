from django.apps import AppConfig


class CdfExactConfig(AppConfig):
    name = 'cdf_exact'
    verbose_name = 'Exact distributions'
