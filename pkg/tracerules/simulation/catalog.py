"""
Operation template catalog for the workload simulator.

The catalog is data: operations as sequences of RPC hops, the tenant
profiles that string operations together, timing ranges, the body field
layout and the fault manifestation knobs.  See docs/catalog.md for the file
format.
"""

import collections
import json
import os.path
from .. import errors, events

DEFAULT_CATALOG = os.path.join(os.path.dirname(__file__), 'catalog.json')

Timing = collections.namedtuple('Timing', 'tenant_offset_s, think_s, '
                                'request_to_head_s, slot_gap_s, hop_gap_s, '
                                'poll_delay_s, max_span_s, heartbeat_s')
BodyLayout = collections.namedtuple('BodyLayout', 'request_field, '
                                    'chained_field, tenant_fields, '
                                    'filler_fields, noise_fields')
FaultModel = collections.namedtuple('FaultModel', 'benign_probability, '
                                    'swap_probability, rest_error_delay_s, '
                                    'error_status')
Slot = collections.namedtuple('Slot', 'choices, fixed')
Hop = collections.namedtuple('Hop', 'slots, shuffle, repeat, gap_s, '
                             'slot_gap_s')


class Operation(collections.namedtuple('Operation', 'name, subsystem, '
                                       'request, rest, poll, hops')):
    """ A tenant request: a REST call, the RPC hops it triggers and an
    optional REST status poll. """

    __slots__ = ()

    @property
    def head(self):
        return self.hops[0].slots[0].choices[0] if self.hops else None

    @property
    def covered(self):
        """ Whether a fault can be activated after the head event. """
        return sum(len(x.slots) for x in self.hops) > 1

    def event_types(self):
        types = [self.request] + list(self.rest)
        if self.poll:
            types.append(self.poll)
        for hop in self.hops:
            for slot in hop.slots:
                types.extend(slot.choices)
        return types


class Catalog(collections.namedtuple('Catalog', 'timing, body, heartbeats, '
                                     'faults, operations, profiles, '
                                     'tenants, path')):

    __slots__ = ()

    def profile_of(self, tenant):
        return self.tenants[tenant % len(self.tenants)]

    def covered_ops(self):
        return sorted(name for name, op in self.operations.items()
                      if op.covered)

    def event_types(self):
        types = set(events.EventType(x, 'report_state')
                    for x in self.heartbeats)
        for op in self.operations.values():
            types.update(op.event_types())
        return types


def _etype(name):
    service, sep, method = name.partition('_')
    if not sep or not service or not method:
        raise ValueError('Not a canonical event name: %r' % name)
    return events.EventType(service, method).validate()


def _range(value, label):
    lo, hi = value
    if not 0 <= lo <= hi:
        raise ValueError('Invalid range for %s: %r' % (label, value))
    return float(lo), float(hi)


def _parse_hop(doc, timing):
    slots = []
    for x in doc['slots']:
        if isinstance(x, str):
            slots.append(Slot((_etype(x),), True))
        else:
            choices = tuple(_etype(y) for y in x)
            if not choices:
                raise ValueError('Empty variant pool')
            slots.append(Slot(choices, False))
    if len(slots) != 3:
        raise ValueError('A hop needs exactly three slots')
    if not slots[0].fixed:
        raise ValueError('The first slot of a hop must be fixed')
    repeat = tuple(int(x) for x in doc.get('repeat', (1, 1)))
    if len(repeat) != 2 or not 1 <= repeat[0] <= repeat[1]:
        raise ValueError('Invalid repeat range: %r' % (repeat,))
    return Hop(tuple(slots), bool(doc.get('shuffle', False)), repeat,
               _range(doc.get('gap_s', timing.hop_gap_s), 'gap_s'),
               _range(doc.get('slot_gap_s', timing.slot_gap_s),
                      'slot_gap_s'))


def _parse_operation(name, doc, timing):
    poll = doc.get('poll')
    return Operation(name, doc['subsystem'], _etype(doc['request']),
                     tuple(_etype(x) for x in doc.get('rest', ())),
                     _etype(poll) if poll else None,
                     tuple(_parse_hop(x, timing) for x in doc['hops']))


def parse_catalog(doc, path=None):
    """ Validate a decoded catalog document. """
    try:
        t = doc['timing']
        timing = Timing(*(_range(t[x], x) for x in Timing._fields[:-2]),
                        max_span_s=float(t['max_span_s']),
                        heartbeat_s=float(t['heartbeat_s']))
        b = doc['body']
        body = BodyLayout(b['request_field'], b['chained_field'],
                          dict(b['tenant_fields']),
                          dict((k, tuple(v)) for k, v in
                               b['filler_fields'].items()),
                          tuple(b['noise_fields']))
        f = doc['faults']
        faults = FaultModel(float(f['benign_probability']),
                            float(f['swap_probability']),
                            _range(f['rest_error_delay_s'],
                                   'rest_error_delay_s'),
                            int(f['error_status']))
        operations = collections.OrderedDict(
            (name, _parse_operation(name, x, timing))
            for name, x in sorted(doc['operations'].items()))
        profiles = dict((k, tuple(v)) for k, v in doc['profiles'].items())
        tenants = tuple(doc['tenants'])
        heartbeats = tuple(doc.get('heartbeats', ()))
    except (KeyError, TypeError, ValueError) as e:
        raise errors.InvalidConfig('Invalid catalog: %s' % e, path=path) \
            from e
    if not 0 <= faults.benign_probability <= 1 or \
       not 0 <= faults.swap_probability <= 1:
        raise errors.InvalidConfig('Fault probabilities must be within '
                                   '[0, 1]', path=path)
    if timing.max_span_s <= 0 or timing.heartbeat_s <= 0:
        raise errors.InvalidConfig('Span and heartbeat period must be '
                                   'positive', path=path)
    for name, ops in profiles.items():
        for op in ops:
            if op not in operations:
                raise errors.InvalidConfig('Profile %s runs unknown operation '
                                           '%s' % (name, op), path=path)
    for name in tenants:
        if name not in profiles:
            raise errors.InvalidConfig('Unknown profile: %s' % name,
                                       path=path)
    if not tenants:
        raise errors.InvalidConfig('Catalog assigns no tenant profile',
                                   path=path)
    return Catalog(timing, body, heartbeats, faults, operations, profiles,
                   tenants, path)


_cache = {}


def load_catalog(path=None):
    """ Load and validate a catalog file; the packaged one by default. """
    path = path or DEFAULT_CATALOG
    if path not in _cache:
        with open(path, encoding='utf-8') as f:
            try:
                doc = json.load(f)
            except ValueError as e:
                raise errors.InvalidConfig('Invalid catalog: %s' % e,
                                           path=path) from e
        _cache[path] = parse_catalog(doc, path=path)
    return _cache[path]
