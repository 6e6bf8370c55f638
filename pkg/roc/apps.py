from django.apps import AppConfig


class RocConfig(AppConfig):
    name = 'roc'
    verbose_name = 'Detector ROC profiles'
