"""
Vocabulary of traced events: event types, events and traces.
"""

import collections
import operator
import types

RPC = 'rpc'
REST = 'rest'
KINDS = RPC, REST

OK = 'ok'
CLIENT_ERROR = 'client_error'
SERVER_ERROR = 'server_error'
NOT_REST = 'not_rest'

_empty_body = types.MappingProxyType({})


class EventType(collections.namedtuple('EventType', 'service, method')):
    """ The (service, method) pair naming a traced communication.  The
    canonical form joins both with an underscore, eg.
    `cinder-scheduler_create_volume`. """

    __slots__ = ()

    def validate(self):
        for label, value in zip(self._fields, self):
            if not isinstance(value, str) or not value:
                raise ValueError('Empty or non-string %s: %r' % (label, value))
            if '\n' in value or '\r' in value:
                raise ValueError('Newline in %s: %r' % (label, value))
        return self

    @property
    def name(self):
        return canonical_name(self)

    def __str__(self):
        return canonical_name(self)


def canonical_name(etype):
    return '%s_%s' % (etype.service, etype.method)


def parse_name(name, services):
    """ Split a canonical name back into an EventType.  The split happens at
    the first underscore that follows one of the registered `services`.
    Service names may contain underscores themselves so the longest matching
    registration wins. """
    for service in sorted(services, key=len, reverse=True):
        if name.startswith(service + '_') and len(name) > len(service) + 1:
            return EventType(service, name[len(service) + 1:])
    raise ValueError('No registered service prefixes name: %s' % name)


class Event(collections.namedtuple('Event', 'ts_us, kind, etype, status, '
                                   'body')):
    """ One traced RPC or REST communication.  Only REST events carry a
    status and only RPC events carry a body. """

    __slots__ = ()

    def __new__(cls, ts_us, kind, etype, status=None, body=None):
        if body is None:
            body = _empty_body
        elif not isinstance(body, types.MappingProxyType):
            body = types.MappingProxyType(dict(body))
        return super().__new__(cls, ts_us, kind, etype, status, body)

    def validate(self):
        if not isinstance(self.ts_us, int) or isinstance(self.ts_us, bool):
            raise ValueError('Timestamp must be an integer: %r' % self.ts_us)
        if self.kind not in KINDS:
            raise ValueError('Invalid event kind: %r' % self.kind)
        self.etype.validate()
        if self.kind == REST:
            if not isinstance(self.status, int) or \
               isinstance(self.status, bool):
                raise ValueError('REST event requires an integer status')
            if not 100 <= self.status <= 599:
                raise ValueError('Status out of range: %d' % self.status)
            if self.body:
                raise ValueError('REST event cannot carry a body')
        else:
            if self.status is not None:
                raise ValueError('RPC event cannot carry a status')
            for key, value in self.body.items():
                if not isinstance(key, str) or not isinstance(value, str):
                    raise ValueError('Body entries must be strings: %r=%r' %
                                     (key, value))
        return self

    @property
    def name(self):
        return canonical_name(self.etype)

    @property
    def is_rpc(self):
        return self.kind == RPC


def status_class(event):
    if event.kind != REST:
        return NOT_REST
    if 400 <= event.status <= 499:
        return CLIENT_ERROR
    if 500 <= event.status <= 599:
        return SERVER_ERROR
    return OK


def is_error(event):
    return status_class(event) in (CLIENT_ERROR, SERVER_ERROR)


class Trace(collections.namedtuple('Trace', 'events, trace_id')):
    """ A timestamp ordered sequence of events. """

    __slots__ = ()

    @classmethod
    def sorted(cls, events, trace_id=''):
        """ Build a trace with a stable sort on the timestamp so events that
        share a timestamp keep their input order. """
        ordered = sorted(events, key=operator.attrgetter('ts_us'))
        return cls(tuple(ordered), trace_id)

    def rpc_events(self):
        return [x for x in self.events if x.kind == RPC]

    def type_sequence(self):
        return [x.name for x in self.events]

    def services(self):
        return services_of(self)


def services_of(trace):
    """ The service registry used when parsing canonical names back. """
    return frozenset(x.etype.service for x in trace.events)
