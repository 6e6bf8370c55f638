"""
ROC profile of the largest-eigenvalue detector

WHAT THIS FILE DOES:
- pd_exact at every pf of the grid: threshold by inverting the null c.d.f.,
  pd from the spiked c.d.f. at that threshold
- Optional columns, one flag each:
    --closed-form  pd from the p = m closed form (n = 1 formula when n = 1)
    --asymptotic   large-system limit with c = gamma / m
    --upper-bound  1 - (1 - pf)^(c + 1)
    --trials N     Monte Carlo ROC from N trials per hypothesis
- --with-asym reports max |pd_exact - pd_asymptotic| in the footer
- --asym --c C --n N tabulates the asymptotic profile alone (same as `asym`)

The default pf grid is log-spaced between SPIKEDF['PF_GRID_MIN'] and
1 - SPIKEDF['PF_GRID_MIN'] with SPIKEDF['PF_GRID_POINTS'] points.
"""

from django.conf import settings

from cli.base import SpikedFCommand, add_model_arguments, add_run_arguments
from cli.serializers import AsymRunSerializer, RocRunSerializer
from cli.tables import Table
from monte_carlo.empirical import empirical_roc
from monte_carlo.streams import RngStream
from roc.curves import (
    default_pf_grid,
    roc_alpha0_closed_form,
    roc_asymptotic,
    roc_asymptotic_upper_bound,
    roc_n1_closed_form,
)
from roc.detector import roc_exact
from roc.types import AsymptoticRegime, DetectorConfig

from .asym import asymptotic_table


class Command(SpikedFCommand):
    """
    Tabulate pd against pf

    USAGE:
    python manage.py roc --m 15 --n 10 --p 16 --snr-db 10
    python manage.py roc --m 6 --n 5 --p 6 --gamma-eq-m --with-asym
    python manage.py roc --m 15 --n 10 --p 16 --snr-db 10 --trials 100000 --threads 8
    python manage.py roc --asym --c 1 --n 5
    """

    help = 'ROC profile of the largest generalized eigenvalue test'
    serializer_class = RocRunSerializer

    def add_arguments(self, parser):
        add_model_arguments(parser, required=False)
        parser.add_argument('--grid', type=str, default=None, help='pf grid start:stop:count')
        parser.add_argument('--gamma-eq-m', action='store_true', help='Use gamma = m')
        parser.add_argument('--closed-form', action='store_true', help='Add the p = m closed-form column')
        parser.add_argument('--asymptotic', action='store_true', help='Add the asymptotic column')
        parser.add_argument('--upper-bound', action='store_true', help='Add the asymptotic upper bound column')
        parser.add_argument('--with-asym', action='store_true',
                            help='Report the largest gap to the asymptotic profile')
        parser.add_argument('--trials', type=int, default=None,
                            help='Monte Carlo trials per hypothesis for an empirical column (0 = none)')

        # ========== ASYMPTOTIC-ONLY MODE ==========
        parser.add_argument('--asym', action='store_true', help='Asymptotic profile only (needs --c and --n)')
        parser.add_argument('--c', type=float, default=None, help='Limit of gamma / m (with --asym)')
        add_run_arguments(parser)

    def get_serializer_class(self, flags):
        return AsymRunSerializer if flags.get('asym') else RocRunSerializer

    def build_table(self, spec):
        if 'cfg' not in spec:
            return asymptotic_table(spec)

        cfg = DetectorConfig(spec['cfg'])
        gamma = spec['eta']
        m, n = cfg.base.m, cfg.base.n
        if spec.get('grid') is not None:
            pf_grid = spec['grid'].values()
        else:
            pf_grid = default_pf_grid(settings.SPIKEDF['PF_GRID_POINTS'], settings.SPIKEDF['PF_GRID_MIN'])

        exact = roc_exact(gamma, cfg, pf_grid, workers=spec['threads'])
        regime = AsymptoticRegime(gamma / m, n)

        columns = ['pf', 'pd_exact']
        extra = []
        if spec['closed_form']:
            if n == 1:
                extra.append(('pd_closed_form', lambda pf: roc_n1_closed_form(gamma, m, pf)))
            else:
                extra.append(('pd_closed_form', lambda pf: roc_alpha0_closed_form(gamma, m, n, pf)))
        if spec['asymptotic']:
            extra.append(('pd_asymptotic', lambda pf: roc_asymptotic(regime, pf)))
        if spec['upper_bound']:
            extra.append(('pd_upper_bound', lambda pf: roc_asymptotic_upper_bound(regime.c, pf)))
        columns += [name for name, _ in extra]

        empirical = None
        if spec['trials'] > 0:
            empirical = empirical_roc(
                cfg.base, gamma, spec['trials'], pf_grid, RngStream(spec['seed']),
                threads=spec['threads'], chunk_size=settings.SPIKEDF['MC_CHUNK_SIZE'],
            )
            columns.append('pd_empirical')

        table = Table(columns)
        for i, point in enumerate(exact):
            row = [point.pf, point.pd] + [pd_of(point.pf) for _, pd_of in extra]
            if empirical is not None:
                row.append(empirical[i].pd)
            table.add(*row)

        if spec['with_asym']:
            gap = max(abs(point.pd - roc_asymptotic(regime, point.pf)) for point in exact)
            table.footer['max_gap_to_asymptotic'] = gap
            table.footer['c'] = regime.c
        return table
