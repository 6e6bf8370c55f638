from django.apps import AppConfig


class SpecialFunctionsConfig(AppConfig):
    name = 'special_functions'
    verbose_name = 'Special functions'
