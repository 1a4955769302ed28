"""
Deterministic multi-tenant workload generator.

Every tenant loops over the operations of its profile, pausing for a think
time between operations.  Operations are expanded from the catalog into REST
and RPC events whose bodies carry the correlation fields among decoy fields.
The hidden session of every event is kept aside as ground truth.
"""

import collections
import logging
import random
import uuid
from . import catalog as catalog_mod
from .truth import GroundTruth
from .. import errors, events

logger = logging.getLogger(__name__)

DEFAULT_START_US = 1500000000 * 1000000
DEFAULT_DURATION_US = 1800 * 1000000

REQUEST = 'request'
REST_CALL = 'rest'
POLL = 'poll'
RPC_CALL = 'rpc'
HEARTBEAT = 'heartbeat'

Scheduled = collections.namedtuple('Scheduled', 'event, session, role, '
                                   'fixed, shuffled')
Execution = collections.namedtuple('Execution', 'session, tenant, op, steps')


class WorkloadConfig(collections.namedtuple('WorkloadConfig', 'tenants, '
                                            'profiles, duration_us, seed, '
                                            'catalog, start_us')):
    """ Workload parameters.  `profiles` assigns a profile name to every
    tenant; it defaults to the catalog's assignment, cycled when there are
    more tenants than assignments. """

    __slots__ = ()

    def __new__(cls, tenants=10, profiles=None,
                duration_us=DEFAULT_DURATION_US, seed=0, catalog=None,
                start_us=DEFAULT_START_US):
        if catalog is None:
            catalog = catalog_mod.load_catalog()
        if not isinstance(tenants, int) or tenants < 0:
            raise errors.InvalidConfig('Tenant count must be a non-negative '
                                       'integer: %r' % tenants)
        if not isinstance(duration_us, int) or duration_us <= 0:
            raise errors.InvalidConfig('Duration must be a positive number of '
                                       'microseconds: %r' % duration_us)
        if profiles is None:
            profiles = [catalog.profile_of(x) for x in range(tenants)]
        profiles = tuple(profiles)
        if len(profiles) != tenants:
            raise errors.InvalidConfig('%d profile(s) for %d tenant(s)' % (
                                       len(profiles), tenants))
        for name in profiles:
            if name not in catalog.profiles:
                raise errors.InvalidConfig('Unknown profile: %s' % name)
        return super().__new__(cls, tenants, profiles, duration_us, seed,
                               catalog, start_us)

    def tenants_running(self, op):
        return [i for i, x in enumerate(self.profiles)
                if op in self.catalog.profiles[x]]


def session_id(tenant, op, n):
    return '%02d/%s/%d' % (tenant, op, n)


def parse_session(session):
    tenant, op, n = session.split('/')
    return int(tenant), op, int(n)


def _us(rng, bounds):
    return int(rng.uniform(*bounds) * 1000000)


def _uuid(rng):
    return str(uuid.UUID(int=rng.getrandbits(128), version=4))


def _tenant_values(catalog, tenant, rng):
    values = {}
    for field, fmt in sorted(catalog.body.tenant_fields.items()):
        values[field] = _uuid(rng) if fmt == 'uuid' else fmt % tenant
    return values


def _body(catalog, rng, etype, extra):
    layout = catalog.body
    body = {'method': etype.method}
    for field, choices in sorted(layout.filler_fields.items()):
        body[field] = rng.choice(choices)
    for field in layout.noise_fields:
        body[field] = '%032x' % rng.getrandbits(128)
    body.update(extra)
    return body


def _expand(op, rng, timing):
    """ Lay out one execution as (offset_us, role, etype, fixed, shuffled,
    request_id, chained_id) tuples relative to the REST request. """
    plan = [(0, REQUEST, op.request, True, False, None, None)]
    offset = 0
    for etype in op.rest:
        offset += _us(rng, timing.slot_gap_s)
        plan.append((offset, REST_CALL, etype, True, False, None, None))
    offset += _us(rng, timing.request_to_head_s)
    previous = None
    first = True
    for hop in op.hops:
        for _ in range(rng.randint(*hop.repeat)):
            if not first:
                offset += _us(rng, hop.gap_s)
            first = False
            request_id = 'req-%s' % _uuid(rng)
            slots = list(hop.slots)
            if hop.shuffle:
                tail = slots[1:]
                rng.shuffle(tail)
                slots[1:] = tail
            for i, slot in enumerate(slots):
                if i:
                    offset += _us(rng, hop.slot_gap_s)
                etype = slot.choices[0] if slot.fixed else \
                    rng.choice(slot.choices)
                plan.append((offset, RPC_CALL, etype, slot.fixed,
                             hop.shuffle, request_id, previous))
            previous = request_id
    if op.poll:
        offset += _us(rng, timing.poll_delay_s)
        plan.append((offset, POLL, op.poll, True, False, None, None))
    limit = int(timing.max_span_s * 1000000)
    if offset > limit:
        plan = [(int(x[0] * limit / offset),) + x[1:] for x in plan]
    return plan


def _execute(catalog, op, session, t0, rng, tenant_values):
    layout = catalog.body
    steps = []
    for offset, role, etype, fixed, shuffled, req, chained in \
            _expand(op, rng, catalog.timing):
        ts = t0 + offset
        if role == RPC_CALL:
            extra = dict(tenant_values)
            extra[layout.request_field] = req
            if chained:
                extra[layout.chained_field] = chained
            event = events.Event(ts, events.RPC, etype,
                                 body=_body(catalog, rng, etype, extra))
        else:
            event = events.Event(ts, events.REST, etype, status=200)
        steps.append(Scheduled(event, session, role, fixed, shuffled))
    return steps


def _tenant_executions(config, tenant):
    catalog = config.catalog
    timing = catalog.timing
    rng = random.Random('%d/tenant/%d' % (config.seed, tenant))
    values = _tenant_values(catalog, tenant, rng)
    ops = catalog.profiles[config.profiles[tenant]]
    end = config.start_us + config.duration_us
    t = config.start_us + _us(rng, timing.tenant_offset_s)
    counts = collections.Counter()
    executions = []
    i = 0
    while ops and t < end:
        name = ops[i % len(ops)]
        i += 1
        counts[name] += 1
        session = session_id(tenant, name, counts[name])
        steps = _execute(catalog, catalog.operations[name], session, t, rng,
                         values)
        executions.append(Execution(session, tenant, name, steps))
        t = steps[-1].event.ts_us + _us(rng, timing.think_s)
    return executions


def _heartbeats(config):
    catalog = config.catalog
    rng = random.Random('%d/heartbeats' % config.seed)
    period = int(catalog.timing.heartbeat_s * 1000000)
    end = config.start_us + config.duration_us
    beats = []
    for service in catalog.heartbeats:
        etype = events.EventType(service, 'report_state')
        ts = config.start_us + rng.randrange(period)
        while ts < end:
            event = events.Event(ts, events.RPC, etype,
                                 body=_body(catalog, rng, etype, {}))
            beats.append(Scheduled(event, None, HEARTBEAT, True, False))
            ts += period
    return beats


def schedule(config):
    """ Every tenant execution plus the background heartbeats, before any
    fault is applied. """
    executions = []
    for tenant in range(config.tenants):
        executions.extend(_tenant_executions(config, tenant))
    beats = _heartbeats(config) if config.tenants else []
    return executions, beats


def assemble(config, executions, beats, fault=None, first_failure_us=None):
    steps = [x for e in executions for x in e.steps] + beats
    steps.sort(key=lambda x: x.event.ts_us)
    trace = events.Trace(tuple(x.event for x in steps), 'seed-%d' %
                         config.seed)
    truth = GroundTruth(config.start_us, fault=fault,
                        first_failure_us=first_failure_us,
                        sessions=[x.session for x in steps])
    return trace, truth


def generate(config):
    """ Produce a fault-free trace and its ground truth. """
    executions, beats = schedule(config)
    trace, truth = assemble(config, executions, beats)
    logger.info('Generated %d event(s) from %d execution(s) of %d tenant(s) '
                '(seed %d)' % (len(trace.events), len(executions),
                config.tenants, config.seed))
    return trace, truth


def session_spans(trace, truth):
    """ Map every session to the ordered indexes of its events. """
    spans = collections.OrderedDict()
    for i, session in enumerate(truth.sessions):
        if session is not None:
            spans.setdefault(session, []).append(i)
    return spans
