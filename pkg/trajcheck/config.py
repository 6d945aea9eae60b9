import logging
import os
from collections import namedtuple
from numbers import Integral, Real

import yaml

from trajcheck.errors import ConfigurationError
from trajcheck.util import deep_merge


logger = logging.getLogger('trajcheck.config')

DEFAULT_CONFIG_FILE = 'trajcheck.yml'


class Settings(namedtuple('Settings', 'legendre_degree_cap '
                                      'general_degree_cap '
                                      'min_reliable_digits '
                                      'marginal_tolerance '
                                      'series_tolerance '
                                      'escalation_factor '
                                      'kernel_threshold '
                                      'sup_norm_grid '
                                      'sup_norm_warning '
                                      'support_slack '
                                      'projection_order '
                                      'synth_order '
                                      'workers')):
    __slots__ = ()

    DEFAULTS = {
        'legendre_degree_cap': 60,
        'general_degree_cap': 12,
        'min_reliable_digits': 4,
        'marginal_tolerance': 1e-9,
        'series_tolerance': 1e-9,
        'escalation_factor': 10.0,
        'kernel_threshold': 1e-8,
        'sup_norm_grid': 1024,
        'sup_norm_warning': 1.5,
        'support_slack': 0.05,
        'projection_order': 64,
        'synth_order': 64,
        'workers': 0,
    }

    # Integer settings must be at least this; real ones strictly positive
    INTEGER_MINIMUMS = {
        'legendre_degree_cap': 0,
        'general_degree_cap': 0,
        'min_reliable_digits': 0,
        'sup_norm_grid': 2,
        'projection_order': 1,
        'synth_order': 1,
        'workers': 0,
    }

    @classmethod
    def from_dict(cls, data, defaults=None):
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigurationError(
                'Settings must be a mapping of option names to values')

        unknown = set(data) - set(cls.DEFAULTS)
        if defaults:
            unknown |= set(defaults) - set(cls.DEFAULTS)
        if unknown:
            raise ConfigurationError('Unknown settings: {}'.format(
                ', '.join(sorted(unknown))))

        if defaults is not None:
            actual_defaults = deep_merge(cls.DEFAULTS, defaults)
        else:
            actual_defaults = cls.DEFAULTS

        d = deep_merge(actual_defaults, data)
        for key, value in d.items():
            d[key] = cls._check_value(key, value)

        return cls(**d)

    @classmethod
    def _check_value(cls, key, value):
        if isinstance(value, bool):
            raise ConfigurationError(
                'Setting {} must be numeric, got {!r}'.format(key, value))

        if key in cls.INTEGER_MINIMUMS:
            if not isinstance(value, Integral) \
               or value < cls.INTEGER_MINIMUMS[key]:
                raise ConfigurationError(
                    'Setting {} must be an integer >= {}, got {!r}'.format(
                        key, cls.INTEGER_MINIMUMS[key], value))
            return int(value)

        # YAML reads exponent-only literals such as 1e-9 as strings
        if isinstance(value, str):
            try:
                value = float(value)
            except ValueError:
                pass

        if not isinstance(value, Real) or not value > 0:
            raise ConfigurationError(
                'Setting {} must be a positive number, got {!r}'.format(
                    key, value))
        return float(value)

    @classmethod
    def load(cls, path=None):
        if path is None:
            if not os.path.isfile(DEFAULT_CONFIG_FILE):
                return DEFAULT_SETTINGS
            path = DEFAULT_CONFIG_FILE

        logger.info('Loading settings from %s', path)
        with open(path) as f:
            try:
                data = yaml.safe_load(f)
            except yaml.YAMLError as e:
                raise ConfigurationError(
                    'Cannot parse settings file {}: {}'.format(path, e))

        return cls.from_dict(data)

    def to_dict(self):
        return dict(self._asdict())


DEFAULT_SETTINGS = Settings.from_dict({})


def resolve(settings):
    return DEFAULT_SETTINGS if settings is None else settings
