"""
Acceptance suite

WHAT THIS FILE DOES:
- Runs the checks of cli/checks.py and prints one row per result
- Exits with code 4 when any check fails (after the report is written)
- --quick uses the small trial count and fewer configurations
- --check NAME (repeatable) runs only the named checks
- --corrupt inflates the oracle values so the oracle comparisons fail; it
  exists to test the failure path
"""

from django.conf import settings
from django.core.management.base import CommandError

from cli.base import EXIT_FAILED, SpikedFCommand, add_run_arguments
from cli.checks import CHECKS, Suite, run_checks
from cli.serializers import CheckResultSerializer, ValidateRunSerializer
from cli.tables import Table


class Command(SpikedFCommand):
    """
    Run the acceptance checks

    USAGE:
    python manage.py validate
    python manage.py validate --quick --threads 4
    python manage.py validate --check alpha0_chain --check asymptotic
    """

    help = 'Cross-formula, Monte Carlo and invariant checks; exit code 4 on failure'
    serializer_class = ValidateRunSerializer

    def add_arguments(self, parser):
        parser.add_argument('--quick', action='store_true', help='Small trial count, fewer configurations')
        parser.add_argument('--check', action='append', default=None, choices=sorted(CHECKS),
                            help='Run only this check (repeatable)')
        parser.add_argument('--corrupt', action='store_true',
                            help='Test hook: inflate oracle values so the comparisons fail')
        add_run_arguments(parser)

    def build_table(self, spec):
        trials = settings.SPIKEDF['VALIDATE_TRIALS']['quick' if spec['quick'] else 'full']
        suite = Suite(
            seed=spec['seed'],
            threads=spec['threads'],
            trials=trials,
            chunk_size=settings.SPIKEDF['MC_CHUNK_SIZE'],
            quick=spec['quick'],
            corrupt=spec['corrupt'],
        )
        if suite.corrupt:
            self.stderr.write(self.style.WARNING('Oracle corruption enabled: checks are expected to fail'))

        results = CheckResultSerializer(run_checks(suite, spec.get('check')), many=True).data
        table = Table(['check', 'passed', 'value', 'limit', 'detail'])
        for result in results:
            table.add(result['check'], result['passed'], result['value'], result['limit'], result['detail'])
        table.footer['checks'] = len(results)
        table.footer['failed'] = sum(1 for result in results if not result['passed'])
        return table

    def finish(self, table, spec):
        failed = table.footer['failed']
        if failed:
            raise CommandError(f'{failed} of {table.footer["checks"]} checks failed', returncode=EXIT_FAILED)
        self.stderr.write(self.style.SUCCESS(f'All {table.footer["checks"]} checks passed'))
