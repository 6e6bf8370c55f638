"""
Large-system ROC profile

WHAT THIS FILE DOES:
- For m, p -> infinity with gamma / m -> c: pd as a function of pf for a fixed n,
  next to the n-free upper bound 1 - (1 - pf)^(c + 1)
- The default grid 0:1:101 includes pf = 0 (where pd = 0) and pf = 1
"""

from cli.base import SpikedFCommand, add_run_arguments
from cli.serializers import AsymRunSerializer
from cli.tables import Table
from roc.curves import roc_asymptotic, roc_asymptotic_upper_bound
from roc.types import AsymptoticRegime


def asymptotic_table(spec) -> Table:
    regime = AsymptoticRegime(spec['c'], spec['n'])
    table = Table(['pf', 'pd_asymptotic', 'pd_upper_bound'])
    for pf in spec['grid'].values():
        table.add(pf, roc_asymptotic(regime, pf), roc_asymptotic_upper_bound(regime.c, pf))
    return table


class Command(SpikedFCommand):
    """
    Tabulate the asymptotic ROC

    USAGE:
    python manage.py asym --c 1 --n 5
    python manage.py asym --c 0.5 --n 2 --grid 0:1:11 --format json
    """

    help = 'Asymptotic ROC profile (gamma / m -> c) and its upper bound'
    serializer_class = AsymRunSerializer

    def add_arguments(self, parser):
        parser.add_argument('--c', type=float, required=True, help='Limit of gamma / m')
        parser.add_argument('--n', type=int, required=True, help='Signal-plus-noise samples')
        parser.add_argument('--grid', type=str, default=None, help='pf grid start:stop:count (default 0:1:101)')
        add_run_arguments(parser)

    def build_table(self, spec):
        return asymptotic_table(spec)
