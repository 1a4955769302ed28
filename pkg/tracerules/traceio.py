"""
Loading, validation and persistence of traces, rule sets, alerts, field
reports and experiment records.

Every loader rejects malformed input instead of repairing it.  Traces and
alerts are JSON Lines files; rule sets, field reports and experiment records
are single JSON documents.
"""

import collections
import glob
import heapq
import json
import operator
import os.path
from . import errors, events, monitor
from .mining import classify, fields
from .simulation import truth

TRACE_FILE = 'trace.jsonl'
EXPERIMENT_FILE = 'experiment.json'
ALERTS_FILE_FMT = 'alerts.%s.jsonl'
TRACE_KEYS = frozenset(('ts_us', 'kind', 'service', 'method', 'status',
                        'body'))
ALERT_KEYS = ('rule_id', 'violation', 'ts_us', 'occurrence')


class ExperimentRecord(collections.namedtuple('ExperimentRecord',
                                              'trace_path, t_start_us, '
                                              'fault, first_failure_us')):

    __slots__ = ()

    def validate(self):
        if self.first_failure_us is not None:
            if self.fault is None:
                raise ValueError('A failure without a fault')
            if self.first_failure_us < self.t_start_us:
                raise ValueError('Failure precedes workload start')
        return self

    @property
    def failed(self):
        return self.first_failure_us is not None


def _dumps(obj):
    return json.dumps(obj, separators=(',', ':'), ensure_ascii=False)


def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


def _require(record, key, check, what, path, line_no):
    if key not in record:
        raise errors.SchemaViolation('Missing field "%s"' % key, path=path,
                                     line_no=line_no, field=key)
    value = record[key]
    if not check(value):
        raise errors.SchemaViolation('Field "%s" must be %s: %r' % (key, what,
                                     value), path=path, line_no=line_no,
                                     field=key)
    return value


def parse_event(record, path=None, line_no=None):
    """ Convert one decoded record to an Event, enforcing the kind, status
    and body consistency rules. """
    if not isinstance(record, dict):
        raise errors.SchemaViolation('Record must be an object', path=path,
                                     line_no=line_no)
    unknown = set(record) - TRACE_KEYS
    if unknown:
        field = sorted(unknown)[0]
        raise errors.SchemaViolation('Unknown field "%s"' % field, path=path,
                                     line_no=line_no, field=field)
    ts_us = _require(record, 'ts_us', _is_int, 'an integer', path, line_no)
    kind = _require(record, 'kind', lambda x: x in events.KINDS,
                    '"rpc" or "rest"', path, line_no)
    nonempty = lambda x: isinstance(x, str) and bool(x) and '\n' not in x
    service = _require(record, 'service', nonempty, 'a non-empty string',
                       path, line_no)
    method = _require(record, 'method', nonempty, 'a non-empty string', path,
                      line_no)
    etype = events.EventType(service, method)
    if kind == events.REST:
        if 'body' in record:
            raise errors.SchemaViolation('REST events carry no body',
                                         path=path, line_no=line_no,
                                         field='body')
        status = _require(record, 'status',
                          lambda x: _is_int(x) and 100 <= x <= 599,
                          'an integer within 100-599', path, line_no)
        return events.Event(ts_us, kind, etype, status=status)
    if 'status' in record:
        raise errors.SchemaViolation('RPC events carry no status', path=path,
                                     line_no=line_no, field='status')
    body = record.get('body', {})
    if not isinstance(body, dict) or not all(
       isinstance(v, str) for v in body.values()):
        raise errors.SchemaViolation('Field "body" must map strings to '
                                     'strings', path=path, line_no=line_no,
                                     field='body')
    return events.Event(ts_us, kind, etype, body=body)


def parse_line(line, path=None, line_no=None):
    """ Parse one trace line, given as text or as raw UTF-8 bytes. """
    try:
        if isinstance(line, bytes):
            line = line.decode('utf-8')
        record = json.loads(line)
    except ValueError as e:
        raise errors.MalformedLine('Invalid record: %s' % e, path=path,
                                   line_no=line_no) from e
    return parse_event(record, path=path, line_no=line_no)


def iter_events(fileobj, path=None, first_line_no=1):
    """ Parse events from an open file in file order.  Binary files are
    decoded line by line so an encoding error names its line. """
    for line_no, line in enumerate(fileobj, first_line_no):
        yield parse_line(line, path=path, line_no=line_no)


def load_trace(path, trace_id=None):
    with open(path, 'rb') as f:
        loaded = list(iter_events(f, path=path))
    return events.Trace.sorted(loaded, path if trace_id is None else trace_id)


def dump_event(event):
    record = collections.OrderedDict((
        ('ts_us', event.ts_us),
        ('kind', event.kind),
        ('service', event.etype.service),
        ('method', event.etype.method),
    ))
    if event.kind == events.REST:
        record['status'] = event.status
    elif event.body:
        record['body'] = collections.OrderedDict(sorted(event.body.items()))
    return _dumps(record)


def write_trace(trace, path):
    with open(path, 'w', encoding='utf-8') as f:
        for event in trace.events:
            f.write(dump_event(event))
            f.write('\n')


def load_corpus(directory):
    """ Every `*.jsonl` trace of a directory, in file name order. """
    paths = sorted(glob.glob(os.path.join(directory, '*.jsonl')))
    if not paths:
        raise errors.EmptyCorpus('No *.jsonl traces found', path=directory)
    return [load_trace(x) for x in paths]


def _load_json(path):
    with open(path, encoding='utf-8') as f:
        try:
            return json.load(f)
        except ValueError as e:
            raise errors.MalformedLine('Invalid document: %s' % e, path=path,
                                       line_no=getattr(e, 'lineno', None)) \
                from e


def _write_json(obj, path):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(obj, f, indent=2, ensure_ascii=False)
        f.write('\n')


def _split_name(name, services):
    if services:
        try:
            return events.parse_name(name, services)
        except ValueError:
            pass
    service, sep, method = name.partition('_')
    if not sep or not service or not method:
        raise ValueError('Not a canonical event name: %r' % name)
    return events.EventType(service, method)


def dump_rule(rule):
    record = collections.OrderedDict((
        ('id', rule.id),
        ('kind', rule.kind),
        ('head', rule.head.name),
        ('body', [x.name for x in rule.body]),
    ))
    if rule.kind == classify.COUNT:
        record['counts'] = collections.OrderedDict(
            (x.name, list(rule.counts[x])) for x in rule.body)
    return record


def write_ruleset(rules, path):
    rules.validate()
    doc = collections.OrderedDict((
        ('delta_t_us', rules.delta_t_us),
        ('rules', [dump_rule(x) for x in rules.rules]),
    ))
    _write_json(doc, path)


def load_ruleset(path, services=None):
    """ Load a rule set.  Canonical names are split after the longest
    matching service of the `services` registry, usually the services of the
    trace the rules are applied to.  Names no registered service prefixes
    are split at the first underscore. """
    doc = _load_json(path)

    def violation(message, field=None):
        return errors.SchemaViolation(message, path=path, field=field)
    if not isinstance(doc, dict):
        raise violation('Rule set must be an object')
    delta = doc.get('delta_t_us')
    if not _is_int(delta) or delta <= 0:
        raise violation('"delta_t_us" must be a positive integer',
                        'delta_t_us')
    if not isinstance(doc.get('rules'), list):
        raise violation('"rules" must be a list', 'rules')
    rules = []
    for i, record in enumerate(doc['rules']):
        try:
            head = _split_name(record['head'], services)
            body = [_split_name(x, services) for x in record['body']]
            counts = {}
            for name, bounds in record.get('counts', {}).items():
                lo, hi = bounds
                if not _is_int(lo) or not _is_int(hi):
                    raise ValueError('Count bounds must be integers')
                counts[_split_name(name, services)] = lo, hi
            rule = classify.MonitoringRule(record['id'], record['kind'],
                                           head, body, counts=counts,
                                           delta_t_us=delta)
            rule.validate()
        except (KeyError, TypeError, ValueError) as e:
            raise violation('Invalid rule #%d: %s' % (i, e), 'rules') from e
        rules.append(rule)
    try:
        return classify.RuleSet(delta, rules).validate()
    except errors.DuplicateRuleId as e:
        e.path = path
        raise


def dump_alert(alert):
    return _dumps(collections.OrderedDict(zip(ALERT_KEYS, alert)))


def write_alerts(alerts, path):
    with open(path, 'w', encoding='utf-8') as f:
        for alert in alerts:
            f.write(dump_alert(alert))
            f.write('\n')


def parse_alert(line, path=None, line_no=None):
    try:
        if isinstance(line, bytes):
            line = line.decode('utf-8')
        record = json.loads(line)
    except ValueError as e:
        raise errors.MalformedLine('Invalid alert: %s' % e, path=path,
                                   line_no=line_no) from e
    if not isinstance(record, dict) or set(record) != set(ALERT_KEYS):
        raise errors.SchemaViolation('Alert must have exactly the fields %s'
                                     % ', '.join(ALERT_KEYS), path=path,
                                     line_no=line_no)
    if not isinstance(record['rule_id'], str) or \
       not isinstance(record['violation'], str) or \
       not _is_int(record['ts_us']) or not _is_int(record['occurrence']):
        raise errors.SchemaViolation('Mistyped alert field', path=path,
                                     line_no=line_no)
    return monitor.FailureAlert(*(record[x] for x in ALERT_KEYS))


def load_alerts(path):
    with open(path, 'rb') as f:
        return [parse_alert(line, path=path, line_no=i)
                for i, line in enumerate(f, 1)]


def merge_alerts(*streams):
    """ Merge sorted alert streams into one stream sorted by time.  An alert
    present in several streams, such as a REST error, is kept once. """
    merged = []
    seen = set()
    for alert in heapq.merge(*streams, key=operator.attrgetter('ts_us')):
        if alert not in seen:
            seen.add(alert)
            merged.append(alert)
    return merged


def dump_fault(fault):
    if fault is None:
        return None
    return collections.OrderedDict(zip(truth.FaultSpec._fields, fault))


def write_experiment(record, path):
    record.validate()
    doc = collections.OrderedDict((
        ('t_start_us', record.t_start_us),
        ('fault', dump_fault(record.fault)),
        ('first_failure_us', record.first_failure_us),
    ))
    _write_json(doc, path)


def load_experiment(path):
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise errors.SchemaViolation('Experiment must be an object',
                                     path=path)
    for key in ('t_start_us', 'fault', 'first_failure_us'):
        if key not in doc:
            raise errors.SchemaViolation('Missing field "%s"' % key,
                                         path=path, field=key)
    if not _is_int(doc['t_start_us']):
        raise errors.SchemaViolation('"t_start_us" must be an integer',
                                     path=path, field='t_start_us')
    failure = doc['first_failure_us']
    if failure is not None and not _is_int(failure):
        raise errors.SchemaViolation('"first_failure_us" must be an integer '
                                     'or null', path=path,
                                     field='first_failure_us')
    fault = doc['fault']
    if fault is not None:
        try:
            fault = truth.FaultSpec(**fault)
        except (TypeError, ValueError) as e:
            raise errors.SchemaViolation('Invalid fault: %s' % e, path=path,
                                         field='fault') from e
    trace_path = os.path.join(os.path.dirname(path), TRACE_FILE)
    record = ExperimentRecord(trace_path, doc['t_start_us'], fault, failure)
    try:
        return record.validate()
    except ValueError as e:
        raise errors.SchemaViolation(str(e), path=path) from e


def experiment_dirs(root):
    """ Sorted experiment directories below `root`; each must hold an
    experiment record. """
    if not os.path.isdir(root):
        raise errors.DataError('Not a directory', path=root)
    found = []
    for name in sorted(os.listdir(root)):
        path = os.path.join(root, name)
        if not os.path.isdir(path):
            continue
        record = os.path.join(path, EXPERIMENT_FILE)
        if not os.path.isfile(record):
            raise errors.DataError('Missing experiment record', path=record)
        found.append(path)
    return found


def alerts_path(experiment_dir, approach):
    return os.path.join(experiment_dir, ALERTS_FILE_FMT % approach)


def write_fields(selected, reports, path, cfg=None):
    cfg = cfg or fields.FieldSelectorConfig()
    doc = collections.OrderedDict((
        ('epsilon1', cfg.epsilon1),
        ('epsilon2', cfg.epsilon2),
        ('selected', sorted(selected)),
        ('reports', [collections.OrderedDict(zip(fields.FieldReport._fields,
                     (x.field, list(x.per_trace_p1), list(x.per_trace_p2),
                      x.selected))) for x in reports]),
    ))
    _write_json(doc, path)


def load_fields(path):
    """ The selected field names of a field report. """
    doc = _load_json(path)
    selected = doc.get('selected') if isinstance(doc, dict) else None
    if not isinstance(selected, list) or \
       not all(isinstance(x, str) for x in selected):
        raise errors.SchemaViolation('"selected" must be a list of field '
                                     'names', path=path, field='selected')
    return frozenset(selected)
