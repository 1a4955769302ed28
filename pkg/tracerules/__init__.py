"""
Mine session-free monitoring rules from fault-free traces of a distributed
system and detect failures of concurrent, multi-tenant workloads with them.
"""

from . import errors, events, traceio, monitor, baselines, mining  # noqa
from . import simulation, evaluation, config  # noqa

__version__ = '1.0'
