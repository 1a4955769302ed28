"""
Global tunables shared by the mining, monitoring and evaluation commands.
"""

import collections
from . import errors

SECTION = 'tracerules'
ENV_PREFIX = 'TRACERULES_'

FIELDS = collections.OrderedDict((
    ('delta_t_s', (float, 35)),
    ('eps1', (float, 0.30)),
    ('eps2', (float, 0.30)),
    ('n', (int, 3)),
    ('max_order', (int, 3)),
    ('pm_threshold', (float, 0.01)),
    ('seed', (int, 0)),
    ('grace_s', (float, 5)),
))


class GlobalConfig(collections.namedtuple('GlobalConfig', list(FIELDS))):
    """ Immutable settings.  Values are layered, lowest precedence first:
    built-in defaults, the `[tracerules]` section of the user config file,
    `TRACERULES_<KEY>` environment variables and command line flags. """

    __slots__ = ()

    def __new__(cls, **values):
        unknown = set(values) - set(FIELDS)
        if unknown:
            raise errors.InvalidConfig('Unknown setting(s): %s' %
                                       ', '.join(sorted(unknown)))
        merged = []
        for key, (type_, default) in FIELDS.items():
            value = values.get(key)
            if value is None:
                value = default
            try:
                merged.append(type_(value))
            except (TypeError, ValueError) as e:
                raise errors.InvalidConfig('Invalid %s: %r' % (key, value)) \
                    from e
        return super().__new__(cls, *merged).validate()

    def validate(self):
        if self.delta_t_s <= 0:
            raise errors.InvalidConfig('delta_t_s must be positive')
        for key in ('eps1', 'eps2'):
            if not 0 <= getattr(self, key) <= 1:
                raise errors.InvalidConfig('%s must be within [0, 1]' % key)
        if self.n < 1 or self.max_order < 1:
            raise errors.InvalidConfig('n and max_order must be at least 1')
        if not 0 < self.pm_threshold <= 1:
            raise errors.InvalidConfig('pm_threshold must be within (0, 1]')
        if self.grace_s < 0:
            raise errors.InvalidConfig('grace_s cannot be negative')
        return self

    @property
    def delta_t_us(self):
        return seconds_to_us(self.delta_t_s)

    @property
    def grace_us(self):
        return seconds_to_us(self.grace_s)


def seconds_to_us(seconds):
    return int(round(seconds * 1000000))


def defaults():
    """ Defaults in the string form of an INI section. """
    return dict((k, str(v[1])) for k, v in FIELDS.items())


def env_name(key):
    return ENV_PREFIX + key.upper()


def resolve(section=None, **overrides):
    """ Build a GlobalConfig from an INI section (any mapping of strings)
    with explicit, non-None, overrides on top. """
    values = dict((k, v) for k, v in (section or {}).items() if k in FIELDS)
    values.update((k, v) for k, v in overrides.items() if v is not None)
    return GlobalConfig(**values)
