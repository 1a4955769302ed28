"""
Classification of mined rule drafts into ORD, OCC and COUNT rules.
"""

import collections
import logging
import types
from .. import errors, events

logger = logging.getLogger(__name__)

ORD = 'ORD'
OCC = 'OCC'
COUNT = 'COUNT'
RULE_KINDS = ORD, OCC, COUNT


class MonitoringRule(collections.namedtuple('MonitoringRule', 'id, kind, '
                                            'head, body, counts, '
                                            'delta_t_us')):
    """ A mined rule.  For ORD the body is the expected follower sequence,
    for OCC it is the sorted multiset of followers and for COUNT it is the
    sorted list of counted types with their `counts` ranges. """

    __slots__ = ()

    def __new__(cls, id, kind, head, body, counts=None, delta_t_us=None):
        counts = types.MappingProxyType(dict(counts or {}))
        return super().__new__(cls, id, kind, head, tuple(body), counts,
                               delta_t_us)

    def validate(self):
        if not self.id:
            raise ValueError('Rule without id')
        if self.kind not in RULE_KINDS:
            raise ValueError('Invalid rule kind: %r' % self.kind)
        self.head.validate()
        for x in self.body:
            x.validate()
        if not self.body:
            raise ValueError('Rule %s has an empty body' % self.id)
        if self.kind == COUNT:
            if set(self.counts) != set(self.body):
                raise ValueError('Rule %s counts do not cover its body' %
                                 self.id)
            for etype, (lo, hi) in self.counts.items():
                if not 1 <= lo <= hi:
                    raise ValueError('Rule %s has invalid range for %s: '
                                     '[%d, %d]' % (self.id, etype, lo, hi))
        elif self.counts:
            raise ValueError('Only COUNT rules carry counts: %s' % self.id)
        if not isinstance(self.delta_t_us, int) or self.delta_t_us <= 0:
            raise ValueError('Rule %s has invalid window' % self.id)
        return self

    @property
    def size(self):
        """ Number of events in the rule; a (min, max) pair for COUNT. """
        if self.kind != COUNT:
            return len(self.body) + 1
        lo = sum(x[0] for x in self.counts.values())
        hi = sum(x[1] for x in self.counts.values())
        return lo + 1, hi + 1

    def subsystems(self):
        services = [self.head.service] + [x.service for x in self.body]
        return sorted(set(x.split('-', 1)[0] for x in services))

    def describe(self):
        size = self.size
        if self.kind == COUNT:
            size = '%d-%d' % size
        return {
            "id": self.id,
            "kind": self.kind,
            "events": size,
            "head": self.head.name,
            "subsystems": ', '.join(self.subsystems())
        }


class RuleSet(collections.namedtuple('RuleSet', 'delta_t_us, rules')):

    __slots__ = ()

    def __new__(cls, delta_t_us, rules=()):
        return super().__new__(cls, delta_t_us, tuple(rules))

    def validate(self):
        seen = set()
        for rule in self.rules:
            rule.validate()
            if rule.id in seen:
                raise errors.DuplicateRuleId('Duplicate rule id: %s' %
                                             rule.id)
            seen.add(rule.id)
        return self

    def by_id(self):
        return dict((x.id, x) for x in self.rules)


def rule_id(kind, head):
    return '%s-%s' % (kind.lower(), events.canonical_name(head))


def follower_types(draft):
    """ Types common to every instance, the head type excluded: the monitor
    pairs body events by per-type occurrence index and the head type's index
    already belongs to the activating head. """
    return frozenset(t for t, n in draft.common_types.items()
                     if n > 0 and t != draft.head_type)


def restrict(chain, keep):
    return tuple(x.etype for x in chain.members[1:] if x.etype in keep)


def classify(draft):
    """ Decide the rule kind from the instances of a draft.  Count variation
    dominates (COUNT), then order variation (OCC), otherwise the single
    observed sequence becomes an ORD rule. """
    keep = follower_types(draft)
    if not keep or not draft.instances:
        raise errors.NotEmittable('Draft for %s has no common follower' %
                                  events.canonical_name(draft.head_type))
    sequences = [restrict(x, keep) for x in draft.instances]
    tallies = [collections.Counter(x) for x in sequences]
    order = sorted(keep, key=events.canonical_name)
    ranges = collections.OrderedDict()
    for etype in order:
        observed = [x[etype] for x in tallies]
        ranges[etype] = min(observed), max(observed)
    head = draft.head_type
    if any(lo != hi for lo, hi in ranges.values()):
        kind = COUNT
        return MonitoringRule(rule_id(kind, head), kind, head, order,
                              counts=ranges, delta_t_us=draft.delta_t_us)
    if len(set(sequences)) == 1:
        kind = ORD
        body = sequences[0]
    else:
        kind = OCC
        body = sorted(sequences[0], key=events.canonical_name)
    logger.debug('Classified %s as %s over %d instance(s)' % (
                 events.canonical_name(head), kind, len(sequences)))
    return MonitoringRule(rule_id(kind, head), kind, head, body,
                          delta_t_us=draft.delta_t_us)


def relax(rule):
    """ The OCC rule accepting every trace the given ORD rule accepts. """
    if rule.kind != ORD:
        raise ValueError('Only ORD rules can be relaxed: %s' % rule.id)
    body = sorted(rule.body, key=events.canonical_name)
    return MonitoringRule(rule_id(OCC, rule.head), OCC, rule.head, body,
                          delta_t_us=rule.delta_t_us)
