"""
Monte Carlo samples of the largest generalized eigenvalue

WHAT THIS FILE DOES:
- Without --grid: the samples in ascending order (rank, lambda_max, kappa_lambda_max)
- With --grid: the empirical c.d.f. over the grid next to the exact one
- --ks adds the Kolmogorov-Smirnov distance and its 1% critical value to
  the footer

Grid points are on the kappa * lambda scale, like the cdf command.
"""

from django.conf import settings

from cli.base import SpikedFCommand, add_model_arguments, add_run_arguments
from cli.serializers import McRunSerializer
from cli.tables import Table
from monte_carlo.empirical import empirical_cdf, ks_critical_value, ks_distance
from monte_carlo.streams import RngStream

from .cdf import analytic_cdf


class Command(SpikedFCommand):
    """
    Draw largest-eigenvalue samples

    USAGE:
    python manage.py mc --m 10 --n 5 --p 15 --trials 1000
    python manage.py mc --m 10 --n 5 --p 15 --snr-db 10 --trials 100000 --grid 0:20:100 --ks --threads 8
    """

    help = 'Monte Carlo samples or empirical c.d.f. of the largest generalized eigenvalue'
    serializer_class = McRunSerializer

    def add_arguments(self, parser):
        add_model_arguments(parser)
        parser.add_argument('--trials', type=int, required=True, help='Number of trials')
        parser.add_argument('--hypothesis', choices=['H0', 'H1'], default=None,
                            help='H0 (noise only) or H1 (signal); default H1 when the SNR is positive')
        parser.add_argument('--grid', type=str, default=None, help='x grid start:stop:count')
        parser.add_argument('--ks', action='store_true', help='Report the KS distance to the exact c.d.f.')
        add_run_arguments(parser)

    def build_table(self, spec):
        cfg = spec['cfg']
        # the exact c.d.f. under H0 is the null one whatever eta says
        law = cfg if spec['hypothesis'] == 'H1' else cfg.with_eta(0.0)
        samples = empirical_cdf(
            law, spec['hypothesis'], spec['trials'], RngStream(spec['seed']),
            threads=spec['threads'], chunk_size=settings.SPIKEDF['MC_CHUNK_SIZE'],
        )

        if spec.get('grid') is None:
            table = Table(['rank', 'lambda_max', 'kappa_lambda_max'])
            for i, value in enumerate(samples.samples):
                table.add(i + 1, value, cfg.kappa * value)
        else:
            table = Table(['x', 'cdf_empirical', 'cdf_analytic'])
            for x in spec['grid'].values():
                table.add(x, samples(x / cfg.kappa), analytic_cdf(x, law))

        if spec['ks']:
            table.footer['ks_distance'] = ks_distance(samples, lambda lam: analytic_cdf(cfg.kappa * lam, law))
            table.footer['ks_critical_value_1pct'] = ks_critical_value(samples.count, 0.01)
            table.footer['trials'] = samples.count
        return table
