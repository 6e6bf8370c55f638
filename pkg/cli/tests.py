import json
import math
import tempfile
from io import StringIO
from pathlib import Path

from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings
from rest_framework import serializers

from cli.checks import Suite
from cli.reference import cdf_non_deficient
from cli.serializers import CdfRunSerializer, Grid, GridField, flatten_errors
from cli.tables import Table, format_value, render_csv
from roc.curves import roc_alpha0_closed_form, roc_asymptotic, roc_asymptotic_upper_bound
from roc.types import AsymptoticRegime
from special_functions.exceptions import InvalidParameterError


def run(*args):
    """Runs a command; returns (stdout, stderr)."""
    out, err = StringIO(), StringIO()
    call_command(*args, stdout=out, stderr=err)
    return out.getvalue(), err.getvalue()


def rows(text):
    lines = text.strip().split('\n')
    return lines[0].split(','), [line.split(',') for line in lines[1:]]


def column(text, name):
    header, body = rows(text)
    index = header.index(name)
    return [float(row[index]) for row in body]


# ==================== PARSING ====================

class GridFieldTests(SimpleTestCase):

    def test_inclusive_endpoints(self):
        grid = GridField().to_internal_value('0:20:200')
        self.assertEqual(grid, Grid(0.0, 20.0, 200))
        values = grid.values()
        self.assertEqual(len(values), 200)
        self.assertEqual(values[0], 0.0)
        self.assertEqual(values[-1], 20.0)

    def test_single_point(self):
        self.assertEqual(list(GridField().to_internal_value('1:1:1').values()), [1.0])

    def test_rejects_bad_grids(self):
        for text in ('1:2', 'a:2:3', '2:1:3', '0:1:0', '0:1:1', 'nan:1:3'):
            with self.assertRaises(serializers.ValidationError, msg=text):
                GridField().to_internal_value(text)


class RunSpecTests(SimpleTestCase):

    def spec(self, **overrides):
        data = {'m': 10, 'n': 5, 'p': 15, 'grid': '0:20:200', 'format': 'csv'}
        data.update(overrides)
        return CdfRunSerializer(data=data, context={'defaults': settings.SPIKEDF})

    def test_snr_db_conversion(self):
        serializer = self.spec(snr_db=10)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertAlmostEqual(serializer.validated_data['cfg'].eta, 10.0, places=12)
        serializer = self.spec(snr_db=-3)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertAlmostEqual(serializer.validated_data['eta'], 10 ** -0.3, places=15)

    def test_exactly_one_spike_flag(self):
        self.assertFalse(self.spec().is_valid())
        serializer = self.spec(eta=1, snr_db=0)
        self.assertFalse(serializer.is_valid())
        self.assertIn('not both', flatten_errors(serializer.errors))

    def test_defaults_from_settings(self):
        serializer = self.spec(eta=0)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.validated_data['seed'], settings.SPIKEDF['DEFAULT_SEED'])
        self.assertEqual(serializer.validated_data['threads'], settings.SPIKEDF['DEFAULT_THREADS'])
        self.assertEqual(serializer.validated_data['trials'], 0)

    def test_sample_deficient_assumption(self):
        serializer = self.spec(m=5, n=5, p=6, eta=1)
        self.assertFalse(serializer.is_valid())
        self.assertIn('requires m > n', flatten_errors(serializer.errors))
        serializer = self.spec(m=5, n=2, p=4, eta=1)
        self.assertFalse(serializer.is_valid())
        self.assertIn('requires p >= m', flatten_errors(serializer.errors))


class TableTests(SimpleTestCase):

    def test_number_format(self):
        self.assertEqual(format_value(1.0), '1')
        self.assertEqual(format_value(0.015625), '0.015625')
        self.assertEqual(format_value(0.1), '0.1')
        self.assertEqual(format_value(1e-300), '1e-300')
        self.assertEqual(format_value(True), 'true')
        self.assertEqual(format_value(7), '7')

    def test_csv(self):
        table = Table(['x', 'label'])
        table.add(0.5, 'a,b')
        self.assertEqual(render_csv(table), 'x,label\n0.5,"a,b"\n')

    def test_row_width(self):
        with self.assertRaises(ValueError):
            Table(['x', 'y']).add(1.0)


class ReferenceCurveTests(SimpleTestCase):

    def test_null_value(self):
        self.assertAlmostEqual(cdf_non_deficient(1.0, 3, 3, 0), 0.5 ** 9, places=15)

    def test_limits(self):
        self.assertEqual(cdf_non_deficient(0, 4, 4, 3), 0.0)
        self.assertEqual(cdf_non_deficient(math.inf, 4, 4, 3), 1.0)
        self.assertGreater(cdf_non_deficient(1e9, 4, 4, 3), 1 - 1e-6)

    def test_spike_lowers_cdf(self):
        values = [cdf_non_deficient(2.0, 5, 5, eta) for eta in (0, 1, 10, 100)]
        self.assertTrue(all(a > b for a, b in zip(values, values[1:])))

    def test_rejects_bad_input(self):
        with self.assertRaises(InvalidParameterError):
            cdf_non_deficient(-1, 3, 3, 0)
        with self.assertRaises(InvalidParameterError):
            cdf_non_deficient(1, 3, 3, -0.5)


# ==================== COMMANDS ====================

class CdfCommandTests(SimpleTestCase):

    def test_null_single_point(self):
        out, _ = run('cdf', '--m', '3', '--n', '2', '--p', '3', '--eta', '0', '--grid', '1:1:1')
        self.assertEqual(out, 'x,cdf_analytic\n1,0.015625\n')

    def test_row_count(self):
        out, _ = run('cdf', '--m', '10', '--n', '5', '--p', '15', '--eta', '0', '--grid', '0:20:200')
        header, body = rows(out)
        self.assertEqual(header, ['x', 'cdf_analytic'])
        self.assertEqual(len(body), 200)
        self.assertEqual(body[0], ['0', '0'])

    def test_spiked_column_is_monotone(self):
        out, _ = run('cdf', '--m', '10', '--n', '5', '--p', '15', '--snr-db', '10', '--grid', '1:20:200')
        values = column(out, 'cdf_analytic')
        self.assertEqual(len(values), 200)
        self.assertTrue(all(b >= a - 1e-9 for a, b in zip(values, values[1:])))

    def test_snr_db_matches_eta(self):
        by_db, _ = run('cdf', '--m', '4', '--n', '2', '--p', '5', '--snr-db', '10', '--grid', '1:5:5')
        by_eta, _ = run('cdf', '--m', '4', '--n', '2', '--p', '5', '--eta', '10', '--grid', '1:5:5')
        self.assertEqual(by_db, by_eta)

    def test_requires_m_greater_than_n(self):
        with self.assertRaises(CommandError) as cm:
            run('cdf', '--m', '5', '--n', '5', '--p', '6', '--eta', '1', '--grid', '1:2:2')
        self.assertEqual(cm.exception.returncode, 2)
        self.assertIn('requires m > n', str(cm.exception))

    def test_spike_flags_are_exclusive(self):
        with self.assertRaises(CommandError) as cm:
            run('cdf', '--m', '4', '--n', '2', '--p', '5', '--eta', '1', '--snr-db', '0', '--grid', '1:2:2')
        self.assertEqual(cm.exception.returncode, 2)

    def test_bad_grid(self):
        with self.assertRaises(CommandError) as cm:
            run('cdf', '--m', '4', '--n', '2', '--p', '5', '--eta', '1', '--grid', '3:1:5')
        self.assertEqual(cm.exception.returncode, 2)
        self.assertIn('grid', str(cm.exception))

    def test_reference_column(self):
        out, _ = run('cdf', '--m', '3', '--n', '2', '--p', '3', '--eta', '0', '--grid', '1:1:1', '--reference')
        header, _ = rows(out)
        self.assertEqual(header, ['x', 'cdf_analytic', 'cdf_reference'])
        self.assertAlmostEqual(column(out, 'cdf_reference')[0], 0.5 ** 9, places=14)

    def test_empirical_column(self):
        args = ('cdf', '--m', '4', '--n', '2', '--p', '5', '--eta', '2', '--grid', '1:5:5', '--trials', '3000')
        serial, _ = run(*args, '--threads', '1')
        parallel, _ = run(*args, '--threads', '4')
        self.assertEqual(serial, parallel)
        for exact, empirical in zip(column(serial, 'cdf_analytic'), column(serial, 'cdf_empirical')):
            self.assertLess(abs(exact - empirical), 0.05)

    def test_output_is_repeatable(self):
        args = ('cdf', '--m', '6', '--n', '3', '--p', '8', '--snr-db', '10', '--grid', '1:10:10', '--trials', '500')
        self.assertEqual(run(*args), run(*args))

    def test_json(self):
        out, _ = run('cdf', '--m', '3', '--n', '2', '--p', '3', '--eta', '0', '--grid', '1:3:3',
                     '--format', 'json', '--seed', '7')
        data = json.loads(out)
        self.assertEqual(data['metadata']['command'], 'cdf')
        self.assertEqual(data['metadata']['version'], settings.SPIKEDF['VERSION'])
        self.assertEqual(data['metadata']['seed'], 7)
        self.assertEqual(data['metadata']['flags']['grid'], '1:3:3')
        self.assertEqual(list(data['columns']), ['x', 'cdf_analytic'])
        self.assertEqual(data['columns']['x'], [1.0, 2.0, 3.0])
        self.assertAlmostEqual(data['columns']['cdf_analytic'][0], 0.015625, places=15)

    def test_output_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            with override_settings(SPIKEDF={**settings.SPIKEDF, 'OUTPUT_DIR': Path(tmp)}):
                out, _ = run('cdf', '--m', '3', '--n', '2', '--p', '3', '--eta', '0', '--grid', '1:1:1',
                             '--output', 'tables/null.csv')
            self.assertIn('Wrote 1 rows', out)
            self.assertEqual((Path(tmp) / 'tables' / 'null.csv').read_text(), 'x,cdf_analytic\n1,0.015625\n')


class DensityCommandTests(SimpleTestCase):

    def test_single_sample_grid(self):
        # m = 2, n = 1, p = 2: f(lambda) = 2 lambda / (1 + lambda)^3
        out, _ = run('density', '--m', '2', '--n', '1', '--p', '2', '--eta', '0', '--grid', '0.5:2:4')
        header, body = rows(out)
        self.assertEqual(header, ['lambda', 'density'])
        for row in body:
            lam, value = float(row[0]), float(row[1])
            self.assertAlmostEqual(value, 2 * lam / (1 + lam) ** 3, places=13)

    def test_eigenvalue_vector(self):
        out, _ = run('density', '--m', '4', '--n', '2', '--p', '5', '--eta', '2', '--lambdas', '0.5,1.5')
        header, body = rows(out)
        self.assertEqual(header, ['lambda_1', 'lambda_2', 'density'])
        self.assertEqual(len(body), 1)
        self.assertGreater(float(body[0][2]), 0)

    def test_rejects_wrong_length(self):
        with self.assertRaises(CommandError) as cm:
            run('density', '--m', '4', '--n', '2', '--p', '5', '--eta', '2', '--lambdas', '0.5')
        self.assertEqual(cm.exception.returncode, 2)

    def test_grid_needs_one_sample(self):
        with self.assertRaises(CommandError) as cm:
            run('density', '--m', '4', '--n', '2', '--p', '5', '--eta', '2', '--grid', '0.5:2:4')
        self.assertEqual(cm.exception.returncode, 2)


class RocCommandTests(SimpleTestCase):

    def test_monotone_pd(self):
        out, _ = run('roc', '--m', '15', '--p', '16', '--n', '10', '--snr-db', '10', '--grid', '0.01:0.99:25')
        pf, pd = column(out, 'pf'), column(out, 'pd_exact')
        self.assertEqual(len(pd), 25)
        self.assertTrue(all(b >= a - 1e-9 for a, b in zip(pd, pd[1:])))
        self.assertTrue(all(d >= f - 1e-6 for f, d in zip(pf, pd)))

    def test_default_grid(self):
        out, _ = run('roc', '--m', '6', '--n', '3', '--p', '6', '--eta', '10')
        pf = column(out, 'pf')
        self.assertEqual(len(pf), settings.SPIKEDF['PF_GRID_POINTS'])
        self.assertAlmostEqual(pf[0], settings.SPIKEDF['PF_GRID_MIN'])

    def test_optional_columns(self):
        out, _ = run('roc', '--m', '6', '--n', '3', '--p', '6', '--eta', '10', '--grid', '0.1:0.9:5',
                     '--closed-form', '--asymptotic', '--upper-bound')
        header, _ = rows(out)
        self.assertEqual(header, ['pf', 'pd_exact', 'pd_closed_form', 'pd_asymptotic', 'pd_upper_bound'])
        regime = AsymptoticRegime(10 / 6, 3)
        for pf, exact, closed, asym, bound in zip(*(column(out, name) for name in header)):
            self.assertLess(abs(exact - closed), 1e-9)
            self.assertAlmostEqual(closed, roc_alpha0_closed_form(10, 6, 3, pf), places=13)
            self.assertAlmostEqual(asym, roc_asymptotic(regime, pf), places=13)
            self.assertAlmostEqual(bound, roc_asymptotic_upper_bound(10 / 6, pf), places=13)

    def test_closed_form_needs_square_noise_record(self):
        with self.assertRaises(CommandError) as cm:
            run('roc', '--m', '6', '--n', '3', '--p', '8', '--eta', '10', '--closed-form')
        self.assertEqual(cm.exception.returncode, 2)

    def test_gamma_eq_m_with_asym_footer(self):
        out, err = run('roc', '--m', '6', '--p', '6', '--n', '5', '--gamma-eq-m', '--with-asym',
                       '--grid', '0.05:0.95:19', '--format', 'json')
        data = json.loads(out)
        regime = AsymptoticRegime(1, 5)
        expected = max(
            abs(pd - roc_asymptotic(regime, pf))
            for pf, pd in zip(data['columns']['pf'], data['columns']['pd_exact'])
        )
        self.assertAlmostEqual(data['footer']['max_gap_to_asymptotic'], expected, places=14)
        self.assertEqual(data['footer']['c'], 1.0)
        self.assertEqual(err, '')

    def test_csv_footer_goes_to_stderr(self):
        out, err = run('roc', '--m', '6', '--p', '6', '--n', '5', '--gamma-eq-m', '--with-asym',
                       '--grid', '0.1:0.9:3')
        self.assertNotIn('max_gap', out)
        self.assertIn('max_gap_to_asymptotic', err)

    def test_asymptotic_mode(self):
        out, _ = run('roc', '--asym', '--c', '1', '--n', '5')
        header, body = rows(out)
        self.assertEqual(header, ['pf', 'pd_asymptotic', 'pd_upper_bound'])
        self.assertEqual(len(body), 101)
        self.assertEqual(body[0], ['0', '0', '0'])

    def test_empirical_column_is_thread_independent(self):
        args = ('roc', '--m', '6', '--n', '3', '--p', '8', '--eta', '10', '--grid', '0.1:0.9:3', '--trials', '2000')
        serial, _ = run(*args, '--threads', '1')
        parallel, _ = run(*args, '--threads', '4')
        self.assertEqual(serial, parallel)
        self.assertIn('pd_empirical', rows(serial)[0])

    def test_needs_positive_snr(self):
        with self.assertRaises(CommandError) as cm:
            run('roc', '--m', '6', '--n', '3', '--p', '8', '--eta', '0')
        self.assertEqual(cm.exception.returncode, 2)

    def test_gamma_eq_m_excludes_eta(self):
        with self.assertRaises(CommandError) as cm:
            run('roc', '--m', '6', '--n', '3', '--p', '8', '--eta', '1', '--gamma-eq-m')
        self.assertEqual(cm.exception.returncode, 2)


class AsymCommandTests(SimpleTestCase):

    def test_default_grid(self):
        out, _ = run('asym', '--c', '0.5', '--n', '3')
        pf, pd, bound = column(out, 'pf'), column(out, 'pd_asymptotic'), column(out, 'pd_upper_bound')
        self.assertEqual(len(pf), 101)
        self.assertEqual(pf[0], 0.0)
        self.assertEqual(pf[-1], 1.0)
        self.assertTrue(all(d <= b + 1e-14 for d, b in zip(pd, bound)))

    def test_zero_c_is_chance(self):
        out, _ = run('asym', '--c', '0', '--n', '2', '--grid', '0:1:11')
        for pf, pd in zip(column(out, 'pf'), column(out, 'pd_asymptotic')):
            self.assertAlmostEqual(pf, pd, places=14)

    def test_rejects_negative_c(self):
        with self.assertRaises(CommandError) as cm:
            run('asym', '--c', '-1', '--n', '2')
        self.assertEqual(cm.exception.returncode, 2)


class McCommandTests(SimpleTestCase):

    def test_raw_samples(self):
        out, _ = run('mc', '--m', '5', '--n', '2', '--p', '7', '--trials', '50')
        header, body = rows(out)
        self.assertEqual(header, ['rank', 'lambda_max', 'kappa_lambda_max'])
        self.assertEqual(len(body), 50)
        values = column(out, 'lambda_max')
        self.assertEqual(values, sorted(values))
        for lam, scaled in zip(values, column(out, 'kappa_lambda_max')):
            self.assertAlmostEqual(scaled, lam * 2 / 7, places=12)

    def test_ecdf_with_ks_footer(self):
        out, _ = run('mc', '--m', '4', '--n', '2', '--p', '5', '--eta', '2', '--trials', '2000',
                     '--grid', '0.5:8:6', '--ks', '--format', 'json')
        data = json.loads(out)
        self.assertEqual(list(data['columns']), ['x', 'cdf_empirical', 'cdf_analytic'])
        for empirical, exact in zip(data['columns']['cdf_empirical'], data['columns']['cdf_analytic']):
            self.assertLess(abs(empirical - exact), 0.06)
        footer = data['footer']
        self.assertEqual(footer['trials'], 2000)
        self.assertAlmostEqual(footer['ks_critical_value_1pct'], 1.6276 / math.sqrt(2000), places=4)

    def test_explicit_null_hypothesis(self):
        alt, _ = run('mc', '--m', '5', '--n', '2', '--p', '7', '--eta', '50', '--trials', '500')
        null, _ = run('mc', '--m', '5', '--n', '2', '--p', '7', '--eta', '50', '--trials', '500',
                      '--hypothesis', 'H0')
        self.assertGreater(sum(column(alt, 'lambda_max')), sum(column(null, 'lambda_max')))

    def test_h1_needs_a_spike(self):
        with self.assertRaises(CommandError) as cm:
            run('mc', '--m', '5', '--n', '2', '--p', '7', '--trials', '10', '--hypothesis', 'H1')
        self.assertEqual(cm.exception.returncode, 2)


class ValidateCommandTests(SimpleTestCase):

    def test_selected_checks_pass(self):
        out, err = run('validate', '--check', 'special_functions', '--check', 'asymptotic',
                       '--check', 'power_collapse')
        header, body = rows(out)
        self.assertEqual(header, ['check', 'passed', 'value', 'limit', 'detail'])
        self.assertEqual(len(body), 8)
        self.assertTrue(all(row[1] == 'true' for row in body))
        self.assertIn('All 8 checks passed', err)

    def test_corruption_fails_the_run(self):
        with self.assertRaises(CommandError) as cm:
            run('validate', '--check', 'special_functions', '--corrupt')
        self.assertEqual(cm.exception.returncode, 4)

    def test_report_is_written_before_failing(self):
        out, err = StringIO(), StringIO()
        with self.assertRaises(CommandError):
            call_command('validate', '--check', 'special_functions', '--corrupt', '--format', 'json',
                         stdout=out, stderr=err)
        data = json.loads(out.getvalue())
        self.assertEqual(data['columns']['check'][0], 'jacobi_recurrence')
        self.assertFalse(data['columns']['passed'][0])
        self.assertEqual(data['footer']['failed'], 2)

    def test_unknown_check(self):
        with self.assertRaises(CommandError):
            run('validate', '--check', 'no_such_check')


class SuiteTests(SimpleTestCase):

    def test_reference_hook(self):
        self.assertEqual(Suite(seed=1).reference(2.0), 2.0)
        self.assertAlmostEqual(Suite(seed=1, corrupt=True).reference(2.0), 2.1, places=15)

    def test_result(self):
        self.assertTrue(Suite(seed=1).result('x', 0.5, 1.0).passed)
        self.assertFalse(Suite(seed=1).result('x', 2.0, 1.0).passed)
