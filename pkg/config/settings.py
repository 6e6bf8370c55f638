"""
Django settings for the spiked F-matrix project.

WHAT THIS FILE DOES:
- Lists the apps (one per library module, plus the command-line app)
- Sets up logging for every app
- Holds the run-time defaults of the management commands (SPIKEDF dict)
- Sets up REST framework for JSON rendering

There is no database and no web surface: the project is driven through
manage.py commands (cdf, density, roc, asym, mc, validate).
"""

from pathlib import Path
import os

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent
# EXPLANATION: BASE_DIR is the root folder of your project


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('SPIKEDF_SECRET_KEY', 'django-insecure-spikedf-local-only')
# EXPLANATION: Django refuses to start without one, even with no web surface.

DEBUG = False

ALLOWED_HOSTS = []


# Application definition
# EXPLANATION: These are all the apps Django will use

INSTALLED_APPS = [
    # Third party apps
    'rest_framework',

    # Our custom apps
    'special_functions',           # Pochhammer, Jacobi, terminating 2F1
    'linalg_core',                 # Cholesky, Hermitian eigenvalues, log-determinants
    'cdf_exact',                   # exact c.d.f.s and joint densities
    'roc',                         # false alarm / detection / ROC curves
    'monte_carlo',                 # random-matrix oracle
    'cli',                         # management commands
]


# Database
# EXPLANATION: Nothing is stored. Tests use SimpleTestCase, which never opens
# a connection.
DATABASES = {}


# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True


# Django REST Framework settings
# Only the serializers and the JSON renderer are used.
REST_FRAMEWORK = {
    'COMPACT_JSON': True,
    'STRICT_JSON': True,
    'UNICODE_JSON': False,
}


# ==================== LOGGING ====================

LOG_LEVEL = os.environ.get('SPIKEDF_LOG_LEVEL', 'WARNING').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
            # stderr, so tables written to stdout stay clean
            'stream': 'ext://sys.stderr',
        },
    },
    'loggers': {
        app: {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False}
        for app in ('special_functions', 'linalg_core', 'cdf_exact', 'roc', 'monte_carlo', 'cli')
    },
}


# ==================== RUN-TIME DEFAULTS ====================
# EXPLANATION: read by the cli app only; library code takes explicit arguments.

SPIKEDF = {
    'VERSION': '1.0.0',
    'OUTPUT_DIR': Path(os.environ.get('SPIKEDF_OUTPUT_DIR', BASE_DIR / 'output')),
    'DEFAULT_SEED': 20240611,
    'DEFAULT_THREADS': 1,
    'DEFAULT_TRIALS': 0,
    'MC_CHUNK_SIZE': 1024,
    'PF_GRID_POINTS': 101,
    'PF_GRID_MIN': 1e-4,
    'VALIDATE_TRIALS': {'quick': 2000, 'full': 100000},
}
