"""
Run-spec and output serializers

WHAT THIS FILE DOES:
- Validates the flags of every management command before anything runs
- Turns --eta / --snr-db into one spike strength (exactly one may be given)
- Parses grids written as start:stop:count (inclusive endpoints)
- Describes the JSON output: column arrays plus a metadata object

TOPICS TO LEARN:
- Django REST Framework serializers used without models
- Custom serializer fields (GridField)
- Object-level validation in validate()
"""

import math
from typing import NamedTuple

import numpy as np
from rest_framework import serializers

from cdf_exact.config import SpikedFConfig
from monte_carlo.streams import Hypothesis
from special_functions.exceptions import InvalidParameterError

from .checks import CHECKS

MAX_SEED = 2 ** 64 - 1


# ==================== GRIDS ====================

class Grid(NamedTuple):
    start: float
    stop: float
    count: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    def __str__(self):
        return f'{self.start:g}:{self.stop:g}:{self.count}'


class GridField(serializers.CharField):
    """
    A grid written as start:stop:count

    EXAMPLE:
    "0:20:200" -> 200 points from 0 to 20, both ends included
    "1:1:1"    -> the single point 1
    """

    default_error_messages = {
        'format': 'Expected start:stop:count, got "{value}".',
        'count': 'The point count must be at least 1.',
        'order': 'The grid start must not exceed its stop.',
        'single': 'A one-point grid needs start == stop.',
    }

    def to_internal_value(self, data):
        text = super().to_internal_value(data)
        parts = text.split(':')
        if len(parts) != 3:
            self.fail('format', value=text)
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            self.fail('format', value=text)
        if not (math.isfinite(start) and math.isfinite(stop)):
            self.fail('format', value=text)
        if count < 1:
            self.fail('count')
        if stop < start:
            self.fail('order')
        if count == 1 and start != stop:
            self.fail('single')
        return Grid(start, stop, count)

    def to_representation(self, value):
        return str(value)


class FloatListField(serializers.CharField):
    """Comma-separated floats, e.g. --lambdas 0.4,1.5"""

    default_error_messages = {'format': 'Expected comma-separated numbers, got "{value}".'}

    def to_internal_value(self, data):
        text = super().to_internal_value(data)
        try:
            values = [float(part) for part in text.split(',')]
        except ValueError:
            self.fail('format', value=text)
        if not all(math.isfinite(v) for v in values):
            self.fail('format', value=text)
        return values


# ==================== RUN SPECS ====================

class RunSerializer(serializers.Serializer):
    """
    Flags shared by every command

    threads/seed fall back to settings.SPIKEDF when not given
    (the command passes the defaults in through context).
    """

    threads = serializers.IntegerField(min_value=1, required=False, allow_null=True)
    seed = serializers.IntegerField(min_value=0, max_value=MAX_SEED, required=False, allow_null=True)
    output = serializers.CharField(required=False, allow_null=True, allow_blank=False)
    format = serializers.ChoiceField(choices=['csv', 'json'], default='csv')

    def validate(self, attrs):
        defaults = self.context.get('defaults', {})
        if attrs.get('threads') is None:
            attrs['threads'] = defaults.get('DEFAULT_THREADS', 1)
        if attrs.get('seed') is None:
            attrs['seed'] = defaults.get('DEFAULT_SEED', 0)
        return attrs


class ModelRunSerializer(RunSerializer):
    """
    Adds the (m, n, p) triple and the spike strength

    WHAT THIS DOES:
    - Accepts --eta (linear) or --snr-db (eta = 10^(dB/10)), never both
    - Builds a SpikedFConfig, so every contract violation (m <= n, p < m, ...)
      is reported here, before any computation starts
    """

    m = serializers.IntegerField(min_value=1)
    n = serializers.IntegerField(min_value=1)
    p = serializers.IntegerField(min_value=1)
    eta = serializers.FloatField(min_value=0, required=False, allow_null=True)
    snr_db = serializers.FloatField(required=False, allow_null=True)

    # commands that can derive the spike strength themselves turn this off
    spike_required = True

    def resolve_eta(self, attrs):
        eta, snr_db = attrs.get('eta'), attrs.get('snr_db')
        if eta is not None and snr_db is not None:
            raise serializers.ValidationError('Give either --eta or --snr-db, not both.')
        if eta is None and snr_db is None:
            if self.spike_required:
                raise serializers.ValidationError('One of --eta or --snr-db is required.')
            return None
        if snr_db is not None:
            if not math.isfinite(snr_db):
                raise serializers.ValidationError('--snr-db must be finite.')
            return 10.0 ** (snr_db / 10.0)
        return eta

    def validate(self, attrs):
        attrs = super().validate(attrs)
        eta = self.resolve_eta(attrs)
        attrs['eta'] = eta
        try:
            attrs['cfg'] = SpikedFConfig(m=attrs['m'], n=attrs['n'], p=attrs['p'], eta=eta or 0.0)
        except InvalidParameterError as exc:
            raise serializers.ValidationError(str(exc))
        return attrs


class CdfRunSerializer(ModelRunSerializer):
    grid = GridField()
    trials = serializers.IntegerField(min_value=0, required=False, allow_null=True)
    reference = serializers.BooleanField(default=False)

    def validate(self, attrs):
        attrs = super().validate(attrs)
        if attrs['grid'].start < 0:
            raise serializers.ValidationError({'grid': 'x must be nonnegative.'})
        if attrs.get('trials') is None:
            attrs['trials'] = self.context.get('defaults', {}).get('DEFAULT_TRIALS', 0)
        return attrs


class DensityRunSerializer(ModelRunSerializer):
    lambdas = FloatListField(required=False, allow_null=True)
    grid = GridField(required=False, allow_null=True)

    def validate(self, attrs):
        attrs = super().validate(attrs)
        lambdas, grid = attrs.get('lambdas'), attrs.get('grid')
        if (lambdas is None) == (grid is None):
            raise serializers.ValidationError('Give exactly one of --lambdas or --grid.')
        if grid is not None:
            if attrs['n'] != 1:
                raise serializers.ValidationError({'grid': 'A density grid is only available for n = 1.'})
            if grid.start <= 0:
                raise serializers.ValidationError({'grid': 'Eigenvalues must be positive.'})
        return attrs


class RocRunSerializer(ModelRunSerializer):
    grid = GridField(required=False, allow_null=True)
    gamma_eq_m = serializers.BooleanField(default=False)
    closed_form = serializers.BooleanField(default=False)
    asymptotic = serializers.BooleanField(default=False)
    upper_bound = serializers.BooleanField(default=False)
    with_asym = serializers.BooleanField(default=False)
    trials = serializers.IntegerField(min_value=0, required=False, allow_null=True)

    spike_required = False

    def resolve_eta(self, attrs):
        if attrs.get('gamma_eq_m'):
            if attrs.get('eta') is not None or attrs.get('snr_db') is not None:
                raise serializers.ValidationError('--gamma-eq-m cannot be combined with --eta or --snr-db.')
            return float(attrs['m'])
        eta = super().resolve_eta(attrs)
        if eta is None:
            raise serializers.ValidationError('One of --eta, --snr-db or --gamma-eq-m is required.')
        return eta

    def validate(self, attrs):
        attrs = super().validate(attrs)
        if not attrs['eta'] > 0:
            raise serializers.ValidationError('An ROC needs a positive SNR.')
        grid = attrs.get('grid')
        if grid is not None and not (0.0 < grid.start and grid.stop < 1.0):
            raise serializers.ValidationError({'grid': 'Exact ROC points need 0 < pf < 1.'})
        if attrs['closed_form'] and attrs['p'] != attrs['m']:
            raise serializers.ValidationError({'closed_form': 'The closed-form ROC requires p = m.'})
        if attrs.get('trials') is None:
            attrs['trials'] = self.context.get('defaults', {}).get('DEFAULT_TRIALS', 0)
        return attrs


class AsymRunSerializer(RunSerializer):
    c = serializers.FloatField(min_value=0)
    n = serializers.IntegerField(min_value=1)
    grid = GridField(required=False, allow_null=True)

    def validate(self, attrs):
        attrs = super().validate(attrs)
        if attrs.get('grid') is None:
            attrs['grid'] = Grid(0.0, 1.0, 101)
        grid = attrs['grid']
        if grid.start < 0 or grid.stop > 1:
            raise serializers.ValidationError({'grid': 'False alarm rates must lie in [0, 1].'})
        return attrs


class McRunSerializer(ModelRunSerializer):
    trials = serializers.IntegerField(min_value=1)
    hypothesis = serializers.ChoiceField(choices=Hypothesis.choices, required=False, allow_null=True)
    grid = GridField(required=False, allow_null=True)
    ks = serializers.BooleanField(default=False)

    spike_required = False

    def validate(self, attrs):
        attrs = super().validate(attrs)
        if attrs.get('hypothesis') is None:
            attrs['hypothesis'] = Hypothesis.H1 if attrs['cfg'].eta > 0 else Hypothesis.H0
        else:
            attrs['hypothesis'] = Hypothesis(attrs['hypothesis'])
        if attrs['hypothesis'] == Hypothesis.H1 and attrs['cfg'].eta <= 0:
            raise serializers.ValidationError('H1 needs a positive --eta or --snr-db.')
        grid = attrs.get('grid')
        if grid is not None and grid.start < 0:
            raise serializers.ValidationError({'grid': 'x must be nonnegative.'})
        return attrs


class ValidateRunSerializer(RunSerializer):
    quick = serializers.BooleanField(default=False)
    corrupt = serializers.BooleanField(default=False)
    check = serializers.ListField(child=serializers.CharField(), required=False, allow_null=True)

    def validate_check(self, value):
        unknown = sorted(set(value or []) - set(CHECKS))
        if unknown:
            raise serializers.ValidationError(f'Unknown checks: {", ".join(unknown)}.')
        return value


# ==================== OUTPUT ====================

class MetadataSerializer(serializers.Serializer):
    command = serializers.CharField()
    version = serializers.CharField()
    seed = serializers.IntegerField()
    flags = serializers.DictField()


class TableSerializer(serializers.Serializer):
    """
    JSON form of a result table

    columns -> {"x": [...], "cdf_analytic": [...]} in header order
    """

    metadata = MetadataSerializer()
    columns = serializers.SerializerMethodField()
    footer = serializers.DictField()

    def get_columns(self, obj):
        table = obj['table']
        return {
            name: [row[i] for row in table.rows]
            for i, name in enumerate(table.columns)
        }


class CheckResultSerializer(serializers.Serializer):
    """One line of the validate report."""

    check = serializers.CharField()
    passed = serializers.BooleanField()
    value = serializers.FloatField()
    limit = serializers.FloatField()
    detail = serializers.CharField(allow_blank=True)


def flatten_errors(detail) -> str:
    """ValidationError.detail as one readable line."""
    if isinstance(detail, dict):
        parts = []
        for field, messages in detail.items():
            text = flatten_errors(messages)
            parts.append(text if field == 'non_field_errors' else f'{field}: {text}')
        return '; '.join(parts)
    if isinstance(detail, list):
        return ' '.join(flatten_errors(item) for item in detail)
    return str(detail)
