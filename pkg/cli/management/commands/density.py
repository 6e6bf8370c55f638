"""
Joint density of the non-zero eigenvalues

WHAT THIS FILE DOES:
- --lambdas 0.4,1.5,...: one row with the density at that eigenvalue vector
  (n values, strictly ascending)
- --grid a:b:k with n = 1: the single-eigenvalue density over the grid
"""

from cdf_exact.densities import joint_density_null, joint_density_spiked
from cli.base import SpikedFCommand, add_model_arguments, add_run_arguments
from cli.serializers import DensityRunSerializer
from cli.tables import Table


class Command(SpikedFCommand):
    """
    Evaluate the joint eigenvalue density

    USAGE:
    python manage.py density --m 4 --n 2 --p 5 --eta 2 --lambdas 0.5,1.5
    python manage.py density --m 4 --n 1 --p 5 --eta 3 --grid 0.1:10:100
    """

    help = 'Joint density of the ordered non-zero eigenvalues'
    serializer_class = DensityRunSerializer

    def add_arguments(self, parser):
        add_model_arguments(parser)
        parser.add_argument('--lambdas', type=str, default=None,
                            help='Comma-separated ascending eigenvalues (one per signal sample)')
        parser.add_argument('--grid', type=str, default=None,
                            help='Eigenvalue grid start:stop:count (n = 1 only)')
        add_run_arguments(parser)

    def build_table(self, spec):
        cfg = spec['cfg']
        density = joint_density_spiked if cfg.eta > 0 else joint_density_null

        if spec.get('lambdas') is not None:
            lambdas = spec['lambdas']
            table = Table([f'lambda_{i + 1}' for i in range(len(lambdas))] + ['density'])
            table.add(*lambdas, density(lambdas, cfg))
            return table

        table = Table(['lambda', 'density'])
        for lam in spec['grid'].values():
            table.add(lam, density([lam], cfg))
        return table
