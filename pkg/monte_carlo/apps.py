from django.apps import AppConfig


class MonteCarloConfig(AppConfig):
    name = 'monte_carlo'
    verbose_name = 'Monte Carlo oracle'
