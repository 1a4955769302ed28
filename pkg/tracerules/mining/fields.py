"""
Selection of the body fields that correlate events without session ids.

A field of interest must propagate its values to other events (P1) and must
not be (nearly) constant (P2), in every fault-free trace.
"""

import collections
import logging
from .. import errors

logger = logging.getLogger(__name__)

FieldReport = collections.namedtuple('FieldReport', 'field, per_trace_p1, '
                                     'per_trace_p2, selected')


class FieldSelectorConfig(collections.namedtuple('FieldSelectorConfig',
                                                 'epsilon1, epsilon2')):

    __slots__ = ()

    def __new__(cls, epsilon1=0.30, epsilon2=0.30):
        for label, value in (('epsilon1', epsilon1), ('epsilon2', epsilon2)):
            if not 0 <= value <= 1:
                raise errors.InvalidConfig('%s must be within [0, 1]: %r' %
                                           (label, value))
        return super().__new__(cls, float(epsilon1), float(epsilon2))


def _value_spread(trace):
    """ Count, for every value, how many distinct RPC events carry it in any
    of their fields. """
    spread = collections.Counter()
    for event in trace.events:
        if event.body:
            spread.update(set(event.body.values()))
    return spread


def _occurrences(field, trace):
    values = [x.body[field] for x in trace.events if field in x.body]
    if not values:
        raise errors.FieldAbsent(field)
    return values


def propagation_score(field, trace):
    """ Fraction of the field's occurrences whose value is also carried (by
    any field) by at least one other event. """
    values = _occurrences(field, trace)
    spread = _value_spread(trace)
    return sum(1 for x in values if spread[x] > 1) / len(values)


def diversity_score(field, trace):
    """ Distinct values over occurrences; constant fields score 1/N. """
    values = _occurrences(field, trace)
    return len(set(values)) / len(values)


def field_scores(trace):
    """ P1 and P2 of every field of a trace in a single pass. """
    spread = _value_spread(trace)
    occurrences = collections.defaultdict(list)
    for event in trace.events:
        for field, value in event.body.items():
            occurrences[field].append(value)
    scores = {}
    for field, values in occurrences.items():
        p1 = sum(1 for x in values if spread[x] > 1) / len(values)
        p2 = len(set(values)) / len(values)
        scores[field] = p1, p2
    return scores


def _reports(per_trace, cfg):
    fields = sorted(set().union(*per_trace))
    reports = []
    for field in fields:
        p1 = tuple(x[field][0] if field in x else None for x in per_trace)
        p2 = tuple(x[field][1] if field in x else None for x in per_trace)
        # A field missing from any trace fails "in every fault-free trace".
        selected = None not in p1 and min(p1) >= cfg.epsilon1 and \
            min(p2) >= cfg.epsilon2
        reports.append(FieldReport(field, p1, p2, selected))
    return reports


def select_fields(traces, cfg=None):
    """ Return the set of fields of interest and a report for every field
    seen in the corpus.  Per-trace scores of absent fields are None. """
    if cfg is None:
        cfg = FieldSelectorConfig()
    traces = list(traces)
    if not traces:
        raise errors.EmptyCorpus('Field selection needs at least one trace')
    per_trace = [field_scores(x) for x in traces]
    reports = _reports(per_trace, cfg)
    selected = frozenset(x.field for x in reports if x.selected)
    logger.info('Selected %d of %d fields over %d trace(s): %s' % (
                len(selected), len(reports), len(traces),
                ', '.join(sorted(selected)) or '<none>'))
    return selected, reports


def threshold_sweep(traces, values):
    """ Number of selected fields for every (epsilon1, epsilon2) pair drawn
    from `values`. """
    traces = list(traces)
    if not traces:
        raise errors.EmptyCorpus('Threshold sweep needs at least one trace')
    per_trace = [field_scores(x) for x in traces]
    rows = []
    for eps1 in values:
        for eps2 in values:
            cfg = FieldSelectorConfig(eps1, eps2)
            selected = [x for x in _reports(per_trace, cfg) if x.selected]
            rows.append((cfg.epsilon1, cfg.epsilon2, len(selected)))
    return rows
