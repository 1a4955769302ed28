"""
Event correlation and rule mining.

Events of a trace are chained through shared field-of-interest values inside
a time window that starts at the chain's head event.  Chains with the same
head type are intersected over the whole corpus to produce rule drafts.
"""

import collections
import logging
import time
from . import classify
from .. import errors, events

logger = logging.getLogger(__name__)
DEFAULT_DELTA_T_US = 35 * 1000 * 1000

Chain = collections.namedtuple('Chain', 'head, members, trace_id, witnesses')


class MiningConfig(collections.namedtuple('MiningConfig', 'delta_t_us, '
                                          'fields_of_interest')):

    __slots__ = ()

    def __new__(cls, delta_t_us=DEFAULT_DELTA_T_US, fields_of_interest=()):
        if not isinstance(delta_t_us, int) or delta_t_us <= 0:
            raise errors.InvalidConfig('Time window must be a positive '
                                       'number of microseconds: %r' %
                                       delta_t_us)
        return super().__new__(cls, delta_t_us, frozenset(fields_of_interest))


class MinedRuleDraft(collections.namedtuple('MinedRuleDraft', 'head_type, '
                                            'instances, common_types, '
                                            'coverage, emittable, '
                                            'delta_t_us')):
    """ All the chains headed by one event type.  `coverage` is the number
    of traces in which the type heads at least one chain. """

    __slots__ = ()

    @property
    def size(self):
        return sum(self.common_types.values())


def correlation_keys(event, fields):
    return set(event.body[x] for x in fields if x in event.body)


def correlate_chains(trace, cfg):
    """ Partition the RPC events of a trace into chains.  The earliest
    unassigned event becomes a head and absorbs, transitively, every
    unassigned event sharing a field-of-interest value with a member and
    falling inside the head's window. """
    fields = cfg.fields_of_interest
    if not fields:
        logger.warning('No fields of interest; every event is a chain.')
    rpc = [x for x in trace.events if x.kind == events.RPC]
    keys = [correlation_keys(x, fields) for x in rpc]
    index = collections.defaultdict(list)
    for i, values in enumerate(keys):
        for value in values:
            index[value].append(i)
    assigned = [False] * len(rpc)
    chains = []
    for i, head in enumerate(rpc):
        if assigned[i]:
            continue
        assigned[i] = True
        limit = head.ts_us + cfg.delta_t_us
        witness = {}
        pending = collections.deque(sorted(keys[i]))
        visited = set(pending)
        while pending:
            value = pending.popleft()
            for j in index[value]:
                if assigned[j] or rpc[j].ts_us > limit:
                    continue
                assigned[j] = True
                witness[j] = value
                for x in sorted(keys[j] - visited):
                    visited.add(x)
                    pending.append(x)
        positions = [i] + sorted(witness)
        members = tuple(rpc[x] for x in positions)
        witnesses = tuple((n, witness[x]) for n, x in
                          enumerate(positions[1:], 1))
        chains.append(Chain(head, members, trace.trace_id, witnesses))
    return chains


def group_by_head(chains, trace_ids, delta_t_us=DEFAULT_DELTA_T_US):
    """ Intersect the type multisets of all the chains sharing a head type.
    Drafts without a common follower other than the head type, or whose head
    type does not head a chain in every trace, are not emittable. """
    trace_ids = frozenset(trace_ids)
    instances = collections.defaultdict(list)
    heads_in = collections.defaultdict(set)
    for chain in chains:
        instances[chain.head.etype].append(chain)
        heads_in[chain.head.etype].add(chain.trace_id)
    drafts = collections.OrderedDict()
    for head_type in sorted(instances, key=events.canonical_name):
        group = instances[head_type]
        common = None
        for chain in group:
            tally = collections.Counter(x.etype for x in chain.members)
            common = tally if common is None else common & tally
        coverage = len(heads_in[head_type] & trace_ids)
        followers = sum(n for t, n in common.items() if t != head_type)
        emittable = followers > 0 and coverage == len(trace_ids)
        drafts[head_type] = MinedRuleDraft(head_type, tuple(group), common,
                                           coverage, emittable, delta_t_us)
    return drafts


def mine_rules(traces, cfg):
    """ Mine a RuleSet from fault-free traces whose fields of interest have
    already been selected. """
    traces = list(traces)
    if not traces:
        raise errors.EmptyCorpus('Mining needs at least one trace')
    start = time.monotonic()
    chains = []
    for trace in traces:
        chains.extend(correlate_chains(trace, cfg))
    trace_ids = [x.trace_id for x in traces]
    if len(set(trace_ids)) != len(trace_ids):
        raise errors.DataError('Trace ids must be unique within a corpus')
    drafts = group_by_head(chains, trace_ids, cfg.delta_t_us)
    rules = []
    dropped = 0
    for draft in drafts.values():
        if not draft.emittable:
            dropped += 1
            logger.debug('Dropped draft for %s (size %d, coverage %d/%d)' % (
                         events.canonical_name(draft.head_type), draft.size,
                         draft.coverage, len(traces)))
            continue
        rules.append(classify.classify(draft))
    rules.sort(key=lambda x: x.id)
    logger.info('Mined %d rule(s) from %d chain(s) over %d trace(s) in '
                '%.2fs; %d draft(s) dropped' % (len(rules), len(chains),
                len(traces), time.monotonic() - start, dropped))
    return classify.RuleSet(cfg.delta_t_us, rules)
