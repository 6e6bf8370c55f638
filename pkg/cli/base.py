"""
Common base of the management commands

WHAT THIS FILE DOES:
- Declares the shared flags (--threads, --seed, --output, --format) and the
  model flags (--m, --n, --p, --eta, --snr-db)
- Validates options through the command's serializer
- Runs build_table() and writes the result to stdout or to --output
- Turns library errors into CommandError with the documented exit codes

EXIT CODES:
0 success, 2 bad parameters, 3 numerical instability, 4 failed validation
"""

import logging

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from special_functions.exceptions import InvalidParameterError, NumericalInstabilityError

from .serializers import flatten_errors
from .tables import Table, render_csv, render_json, write_text

logger = logging.getLogger(__name__)

EXIT_INVALID = 2
EXIT_NUMERICAL = 3
EXIT_FAILED = 4

# options every Django command has; everything else is echoed into the JSON metadata
DJANGO_OPTIONS = {
    'verbosity', 'settings', 'pythonpath', 'traceback', 'no_color', 'force_color',
    'skip_checks', 'stdout', 'stderr',
}


def add_run_arguments(parser):
    parser.add_argument('--threads', type=int, default=None,
                        help='Worker cap (default: SPIKEDF["DEFAULT_THREADS"])')
    parser.add_argument('--seed', type=int, default=None,
                        help='Random seed (default: SPIKEDF["DEFAULT_SEED"])')
    parser.add_argument('--output', type=str, default=None,
                        help='Write the table to this file; relative paths go under SPIKEDF["OUTPUT_DIR"]')
    parser.add_argument('--format', choices=['csv', 'json'], default='csv', help='Output format')


def add_model_arguments(parser, required=True):
    parser.add_argument('--m', type=int, required=required, help='System dimension')
    parser.add_argument('--n', type=int, required=required, help='Signal-plus-noise samples (n < m)')
    parser.add_argument('--p', type=int, required=required, help='Noise-only samples (p >= m)')
    parser.add_argument('--eta', type=float, default=None, help='Spike strength / SNR, linear')
    parser.add_argument('--snr-db', type=float, default=None, help='Spike strength / SNR in dB')


class SpikedFCommand(BaseCommand):
    """
    Subclasses set serializer_class and implement build_table(spec).

    spec is the serializer's validated_data (cfg, grid, seed, threads, ...).
    """

    serializer_class = None

    def handle(self, *args, **options):
        flags = {
            key: value for key, value in options.items()
            if key not in DJANGO_OPTIONS and isinstance(value, (str, int, float, bool, list, type(None)))
        }
        try:
            spec = self.validate(flags)
            table = self.build_table(spec)
        except InvalidParameterError as exc:
            raise CommandError(str(exc), returncode=EXIT_INVALID)
        except NumericalInstabilityError as exc:
            raise CommandError(f'numerical instability: {exc}', returncode=EXIT_NUMERICAL)

        self.emit(table, spec, flags)
        self.finish(table, spec)

    def validate(self, flags):
        serializer = self.get_serializer_class(flags)(data=flags, context={'defaults': settings.SPIKEDF})
        if not serializer.is_valid():
            raise CommandError(flatten_errors(serializer.errors), returncode=EXIT_INVALID)
        return serializer.validated_data

    def get_serializer_class(self, flags):
        return self.serializer_class

    def build_table(self, spec) -> Table:
        raise NotImplementedError

    def finish(self, table: Table, spec):
        """Runs after the table is written (validate uses it to fail the run)."""

    # ==================== OUTPUT ====================

    def metadata(self, spec, flags):
        return {
            'command': self.command_name(),
            'version': settings.SPIKEDF['VERSION'],
            'seed': spec['seed'],
            'flags': flags,
        }

    def command_name(self):
        return self.__class__.__module__.rsplit('.', 1)[-1]

    def emit(self, table: Table, spec, flags):
        logger.debug('%s: %d rows, format %s', self.command_name(), len(table.rows), spec['format'])
        if spec['format'] == 'json':
            text = render_json(table, self.metadata(spec, flags))
        else:
            text = render_csv(table)
            # CSV keeps data only; summaries go to stderr
            for key, value in table.footer.items():
                self.stderr.write(f'{key}: {value}')

        if spec.get('output'):
            path = write_text(spec['output'], text)
            self.stdout.write(self.style.SUCCESS(f'Wrote {len(table.rows)} rows to {path}'))
        else:
            self.stdout.write(text, ending='')

