"""
C.d.f. of the largest eigenvalue over a grid

WHAT THIS FILE DOES:
- Evaluates the exact c.d.f. (null formula for eta = 0, spiked otherwise)
  at every grid point x
- With --trials > 0 adds a Monte Carlo column at the same points
- With --reference adds the n = m (non-singular) curve for comparison

x is on the scale of the c.d.f. formulas, i.e. kappa times the raw
generalized eigenvalue; the empirical column is evaluated at x / kappa.
"""

from django.conf import settings

from cdf_exact.distributions import cdf_max_null, cdf_max_spiked
from cli.base import SpikedFCommand, add_model_arguments, add_run_arguments
from cli.reference import cdf_non_deficient
from cli.serializers import CdfRunSerializer
from cli.tables import Table
from monte_carlo.empirical import empirical_cdf
from monte_carlo.streams import Hypothesis, RngStream


def analytic_cdf(x, cfg):
    return cdf_max_spiked(x, cfg) if cfg.eta > 0 else cdf_max_null(x, cfg)


class Command(SpikedFCommand):
    """
    Tabulate the c.d.f. of the largest generalized eigenvalue

    USAGE:
    python manage.py cdf --m 10 --n 5 --p 15 --snr-db 10 --grid 0:20:200
    python manage.py cdf --m 10 --n 5 --p 15 --eta 0 --grid 0:20:50 --trials 10000
    """

    help = 'Exact c.d.f. of the largest eigenvalue of the singular F-matrix over a grid'
    serializer_class = CdfRunSerializer

    def add_arguments(self, parser):
        add_model_arguments(parser)
        parser.add_argument('--grid', type=str, required=True, help='x grid as start:stop:count')
        parser.add_argument('--trials', type=int, default=None,
                            help='Monte Carlo trials for an empirical column (0 = none)')
        parser.add_argument('--reference', action='store_true',
                            help='Add the n = m reference curve')
        add_run_arguments(parser)

    def build_table(self, spec):
        cfg = spec['cfg']
        grid = spec['grid'].values()

        columns = ['x', 'cdf_analytic']
        empirical = None
        if spec['trials'] > 0:
            hypothesis = Hypothesis.H1 if cfg.eta > 0 else Hypothesis.H0
            empirical = empirical_cdf(
                cfg, hypothesis, spec['trials'], RngStream(spec['seed']),
                threads=spec['threads'], chunk_size=settings.SPIKEDF['MC_CHUNK_SIZE'],
            )
            columns.append('cdf_empirical')
        if spec['reference']:
            columns.append('cdf_reference')

        table = Table(columns)
        for x in grid:
            row = [x, analytic_cdf(x, cfg)]
            if empirical is not None:
                # EXPLANATION: samples are raw eigenvalues, the grid is kappa * eigenvalue
                row.append(empirical(x / cfg.kappa))
            if spec['reference']:
                row.append(cdf_non_deficient(x, cfg.m, cfg.m, cfg.eta))
            table.add(*row)
        return table
