"""
Streaming matcher for mined rules.

Tenants are told apart without session ids: every event type has a running
occurrence counter, each head occurrence activates an instance of every rule
headed by that type, and follower events are handed out first in first out:
an event goes to the oldest live instance of the rule still waiting for its
type.  An instance that expires leaves the queue, so one lost follower costs
one alert and the pairing of later instances is unaffected.  Timers are
driven by the event clock so replaying a file behaves exactly like watching
it live.
"""

import collections
import heapq
import itertools
import logging
import shellish
import time
from . import errors, events, traceio
from .mining import classify

logger = logging.getLogger(__name__)

TIMEOUT = 'timeout'
OUT_OF_ORDER = 'out_of_order'
OVER_COUNT = 'over_count'
UNDER_COUNT = 'under_count'
REST_ERROR = 'rest_error'
VIOLATIONS = TIMEOUT, OUT_OF_ORDER, OVER_COUNT, UNDER_COUNT, REST_ERROR
REST_RULE_ID = 'rest'

FailureAlert = collections.namedtuple('FailureAlert', 'rule_id, violation, '
                                      'ts_us, occurrence')


class RuleInstance(object):
    """ One activation of a rule by an occurrence of its head type.  Event
    types are tracked by canonical name. """

    def __init__(self, rule, occurrence, opened_at_us):
        self.rule = rule
        self.occurrence = occurrence
        self.opened_at_us = opened_at_us
        self.deadline_us = opened_at_us + rule.delta_t_us
        self.closed = False
        if rule.kind == classify.COUNT:
            self.pending = None
            self.tally = collections.Counter()
        else:
            self.pending = [x.name for x in rule.body]
            self.tally = None

    def __repr__(self):
        return '<%s: %s #%d>' % (type(self).__name__, self.rule.id,
                                 self.occurrence)

    @property
    def complete(self):
        return self.pending is not None and not self.pending

    def under_count(self):
        return any(self.tally[t.name] < lo
                   for t, (lo, _) in self.rule.counts.items())

    def alert(self, violation, ts_us):
        return FailureAlert(self.rule.id, violation, ts_us, self.occurrence)


class Monitor(shellish.Eventer):
    """ Compiled rule set plus the running state of the stream.  The `alert`
    event fires for every alert produced by `feed` or `tick`.

    Rules are matched to events by canonical name, so a rule whose names
    were split differently from the trace's services still applies. """

    def __init__(self, rules, under_count_alerts=False):
        self.rules = rules
        self.under_count_alerts = under_count_alerts
        self.add_events(['alert'])
        self.by_head = collections.defaultdict(list)
        self.by_body = collections.defaultdict(list)
        self.by_counted = collections.defaultdict(list)
        for rule in rules.rules:
            self.by_head[rule.head.name].append(rule)
            if rule.kind == classify.COUNT:
                for etype in rule.body:
                    limit = rule.counts[etype][1]
                    self.by_counted[etype.name].append((rule, limit))
            else:
                for name in sorted(set(x.name for x in rule.body)):
                    self.by_body[name].append(rule)
        windows = [x.delta_t_us for x in rules.rules]
        self.max_delta_t_us = max(windows + [rules.delta_t_us or 0])
        self.reset()

    def reset(self):
        self.counters = collections.Counter()
        self.clock = None
        self.waiting = {}
        self.counting = collections.defaultdict(list)
        self.deadlines = []
        self.sequence = itertools.count()

    def live(self):
        return [x[2] for x in self.deadlines if not x[2].closed]

    def _emit(self, alerts):
        for x in alerts:
            logger.info('Alert %s %s at %d (occurrence %d)' % (x.rule_id,
                        x.violation, x.ts_us, x.occurrence))
            self.fire_event('alert', x)
        return alerts

    def _close(self, instance):
        instance.closed = True
        if instance.pending:
            for name in set(instance.pending):
                key = instance.rule.id, name
                queue = self.waiting.get(key)
                if queue and instance in queue:
                    queue.remove(instance)
                    if not queue:
                        del self.waiting[key]
        elif instance.tally is not None:
            self.counting[instance.rule.id].remove(instance)

    def _expire(self, now_us, inclusive):
        alerts = []
        while self.deadlines:
            deadline, _, instance = self.deadlines[0]
            if deadline > now_us or (deadline == now_us and not inclusive):
                break
            heapq.heappop(self.deadlines)
            if instance.closed:
                continue
            if instance.tally is not None:
                if self.under_count_alerts and instance.under_count():
                    alerts.append(instance.alert(UNDER_COUNT, deadline))
            elif not instance.complete:
                alerts.append(instance.alert(TIMEOUT, deadline))
            self._close(instance)
        return alerts

    def _activate(self, rule, occurrence, ts_us):
        instance = RuleInstance(rule, occurrence, ts_us)
        if instance.pending is not None:
            for name in set(instance.pending):
                key = rule.id, name
                self.waiting.setdefault(key, collections.deque()).append(
                    instance)
        else:
            self.counting[rule.id].append(instance)
        entry = instance.deadline_us, next(self.sequence), instance
        heapq.heappush(self.deadlines, entry)
        return instance

    def _deliver(self, name, ts_us):
        alerts = []
        for rule in self.by_body.get(name, ()):
            key = rule.id, name
            queue = self.waiting.get(key)
            if not queue:
                continue
            instance = queue[0]
            if rule.kind == classify.ORD and instance.pending[0] != name:
                alerts.append(instance.alert(OUT_OF_ORDER, ts_us))
                self._close(instance)
                continue
            instance.pending.remove(name)
            if name not in instance.pending:
                queue.popleft()
                if not queue:
                    del self.waiting[key]
            if instance.complete:
                self._close(instance)
        for rule, limit in self.by_counted.get(name, ()):
            live = self.counting[rule.id]
            if not live:
                continue
            for instance in live:
                if instance.tally[name] < limit:
                    instance.tally[name] += 1
                    break
            else:
                instance = live[0]
                alerts.append(instance.alert(OVER_COUNT, ts_us))
                self._close(instance)
        return alerts

    def feed(self, event):
        """ Consume the next event of the stream and return the alerts it
        causes, starting with instances that expired before it. """
        if self.clock is not None and event.ts_us < self.clock:
            raise errors.TimestampRegression('Event at %d precedes monitor '
                                             'clock %d' % (event.ts_us,
                                                           self.clock))
        self.clock = event.ts_us
        alerts = self._expire(event.ts_us, inclusive=False)
        name = event.etype.name
        self.counters[name] += 1
        index = self.counters[name]
        alerts.extend(self._deliver(name, event.ts_us))
        for rule in self.by_head.get(name, ()):
            self._activate(rule, index, event.ts_us)
        if events.is_error(event):
            alerts.append(FailureAlert(REST_RULE_ID, REST_ERROR, event.ts_us,
                                       index))
        return self._emit(alerts)

    def tick(self, now_us):
        """ Advance the clock without an event, expiring due instances. """
        if self.clock is not None and now_us < self.clock:
            return []
        self.clock = now_us
        return self._emit(self._expire(now_us, inclusive=True))

    def flush(self, last_ts_us):
        """ Close every window opened up to `last_ts_us`, the end of the
        stream. """
        return self.tick(last_ts_us + self.max_delta_t_us)


def compile(rules, under_count_alerts=False):
    """ Build a dormant monitor for a rule set.  An empty rule set still
    yields a monitor that reports REST errors. """
    rules.validate()
    return Monitor(rules, under_count_alerts=under_count_alerts)


def run_stream(monitor, trace):
    """ Replay a whole trace and flush the timers one window after its last
    event. """
    alerts = []
    for event in trace.events:
        alerts.extend(monitor.feed(event))
    if trace.events:
        alerts.extend(monitor.flush(trace.events[-1].ts_us))
    return alerts


def follow(monitor, fileobj, path=None, poll_s=1.0, idle_timeout_s=None,
           clock=time.monotonic, sleep=time.sleep):
    """ Tail a growing trace file opened in binary mode.  Complete lines are
    fed as they appear; while the file is quiet the monitor is ticked with
    the trace time that corresponds to the elapsed wall time since the first
    event.  After `idle_timeout_s` seconds without new lines the stream is
    taken as ended and every open window is flushed; with None it never
    stops. """
    alerts = []
    partial = b''
    line_no = 0
    origin = None
    last_ts_us = None
    idle_since = clock()
    while True:
        chunk = fileobj.readline()
        if chunk:
            partial += chunk
            if not partial.endswith(b'\n'):
                continue
            line_no += 1
            event = traceio.parse_line(partial, path=path, line_no=line_no)
            partial = b''
            if origin is None:
                origin = event.ts_us, clock()
            try:
                alerts.extend(monitor.feed(event))
            except errors.TimestampRegression as e:
                raise errors.TimestampRegression(e.message, path=path,
                                                 line_no=line_no) from e
            last_ts_us = event.ts_us
            idle_since = clock()
            continue
        now = clock()
        if origin is not None:
            elapsed_us = int((now - origin[1]) * 1000000)
            alerts.extend(monitor.tick(origin[0] + elapsed_us))
        if idle_timeout_s is not None and now - idle_since >= idle_timeout_s:
            break
        sleep(poll_s)
    if last_ts_us is not None:
        open_windows = len(monitor.live())
        if open_windows:
            logger.info('Idle for %ss, flushing %d open window(s)' % (
                        idle_timeout_s, open_windows))
        alerts.extend(monitor.flush(last_ts_us))
    return alerts
