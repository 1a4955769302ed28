"""
Scoring of alert streams against the ground truth of fault injection
experiments.

An experiment is labelled from its first alert only: alerts before the
failure, or without any failure, are false positives; the first alert must
land within the time window (plus a grace period) after the failure to count
as a detection of that failure.
"""

import collections
import json
import logging
import os.path
from sklearn.metrics import (accuracy_score, f1_score, precision_score,
                             recall_score)
from . import baselines, config, errors, monitor, traceio
from .mining import classify, fields, patterns

logger = logging.getLogger(__name__)

TP = 'TP'
FP = 'FP'
FN = 'FN'
TN = 'TN'
LABELS = TP, FP, FN, TN

MR = 'mr'
UN = 'un'
PM = 'pm'
REST_ONLY = 'rest-only'
COMBINED = 'combined'
APPROACHES = MR, UN, PM, REST_ONLY, COMBINED


class Outcome(collections.namedtuple('Outcome', 'label, '
                                     'detection_latency_us')):

    __slots__ = ()

    def __new__(cls, label, detection_latency_us=None):
        if label not in LABELS:
            raise ValueError('Invalid label: %r' % label)
        if (label == TP) != (detection_latency_us is not None):
            raise ValueError('Latency is set for true positives only')
        return super().__new__(cls, label, detection_latency_us)


class Metrics(collections.namedtuple('Metrics', 'precision, recall, f1, '
                                     'accuracy, mean_latency_us, tp, fp, fn, '
                                     'tn')):

    __slots__ = ()

    @property
    def total(self):
        return self.tp + self.fp + self.fn + self.tn

    def as_dict(self):
        return collections.OrderedDict(zip(self._fields, self))


Models = collections.namedtuple('Models', 'rules, ngram, vmm')


def score(alerts, truth, delta_t_us, grace_us=5000000):
    """ Label one experiment.  `truth` is anything with `t_start_us` and
    `first_failure_us`, such as a GroundTruth or an ExperimentRecord. """
    for a, b in zip(alerts, alerts[1:]):
        if b.ts_us < a.ts_us:
            raise errors.UnsortedAlerts('Alerts are not sorted by time: %d '
                                        'after %d' % (b.ts_us, a.ts_us))
    first = alerts[0] if alerts else None
    failure = truth.first_failure_us
    if failure is None:
        return Outcome(FP if first else TN)
    if first is None:
        return Outcome(FN)
    if first.ts_us < failure:
        return Outcome(FP)
    if first.ts_us <= failure + delta_t_us + grace_us:
        return Outcome(TP, first.ts_us - truth.t_start_us)
    return Outcome(FN)


# Label -> (y_true, y_pred) cell of the binary confusion matrix.
CONFUSION_CELLS = {
    TP: (1, 1),
    FP: (0, 1),
    FN: (1, 0),
    TN: (0, 0),
}


def aggregate(outcomes):
    """ Campaign level metrics.  Ratios with a zero denominator are 0. """
    outcomes = list(outcomes)
    if not outcomes:
        raise errors.EmptySet('Cannot aggregate an empty set of outcomes')
    counts = collections.Counter(x.label for x in outcomes)
    tp, fp, fn, tn = (counts[x] for x in LABELS)
    y_true, y_pred = zip(*(CONFUSION_CELLS[x.label] for x in outcomes))
    precision = float(precision_score(y_true, y_pred, zero_division=0))
    recall = float(recall_score(y_true, y_pred, zero_division=0))
    f1 = float(f1_score(y_true, y_pred, zero_division=0))
    accuracy = float(accuracy_score(y_true, y_pred))
    latencies = [x.detection_latency_us for x in outcomes if x.label == TP]
    mean_latency = sum(latencies) / len(latencies) if latencies else None
    return Metrics(precision, recall, f1, accuracy,
                   mean_latency, tp, fp, fn, tn)


def train(corpus, approaches, cfg=None):
    """ Build the models the given approaches need from fault-free
    traces. """
    cfg = cfg or config.GlobalConfig()
    approaches = set(approaches)
    rules = ngram = vmm = None
    if approaches & {MR, COMBINED}:
        selector = fields.FieldSelectorConfig(cfg.eps1, cfg.eps2)
        selected, _ = fields.select_fields(corpus, selector)
        mining = patterns.MiningConfig(cfg.delta_t_us, selected)
        rules = patterns.mine_rules(corpus, mining)
    if UN in approaches:
        ngram = baselines.ngram_train(corpus, cfg.n)
    if PM in approaches:
        vmm = baselines.vmm_train(corpus, cfg.max_order)
    return Models(rules, ngram, vmm)


def run_approach(approach, models, trace, cfg=None, under_count_alerts=False):
    """ Alerts of one approach over one trace, sorted by time. """
    cfg = cfg or config.GlobalConfig()
    if approach == MR:
        return monitor.run_stream(monitor.compile(
            models.rules, under_count_alerts=under_count_alerts), trace)
    if approach == REST_ONLY:
        rules = classify.RuleSet(cfg.delta_t_us, ())
        return monitor.run_stream(monitor.compile(rules), trace)
    if approach == COMBINED:
        return traceio.merge_alerts(
            run_approach(MR, models, trace, cfg, under_count_alerts),
            run_approach(REST_ONLY, models, trace, cfg))
    if approach == UN:
        return baselines.ngram_detect(models.ngram, trace)
    if approach == PM:
        return baselines.vmm_detect(models.vmm, trace, cfg.pm_threshold)
    raise ValueError('Unknown approach: %s' % approach)


def load_experiments(root):
    """ (directory, ExperimentRecord) pairs of a campaign. """
    return [(x, traceio.load_experiment(os.path.join(x,
             traceio.EXPERIMENT_FILE))) for x in traceio.experiment_dirs(root)]


def experiment_alerts(directory, approach):
    """ Stored alerts of an experiment.  Combined alerts are merged from the
    `mr` and `rest-only` files when there is no combined file. """
    path = traceio.alerts_path(directory, approach)
    if approach == COMBINED and not os.path.exists(path):
        return traceio.merge_alerts(experiment_alerts(directory, MR),
                                    experiment_alerts(directory, REST_ONLY))
    if not os.path.exists(path):
        raise errors.DataError('Missing alert file', path=path)
    return traceio.load_alerts(path)


def monitor_campaign(root, approach, models, cfg=None,
                     under_count_alerts=False):
    """ Run an approach over every experiment and store its alerts. """
    cfg = cfg or config.GlobalConfig()
    written = []
    for directory, record in load_experiments(root):
        trace = traceio.load_trace(record.trace_path)
        alerts = run_approach(approach, models, trace, cfg, under_count_alerts)
        path = traceio.alerts_path(directory, approach)
        traceio.write_alerts(alerts, path)
        logger.info('%s: %d %s alert(s)' % (directory, len(alerts),
                    approach))
        written.append(path)
    return written


def evaluate_campaign(root, approach, delta_t_us, grace_us=5000000):
    """ Score the stored alerts of every experiment.  Returns the per
    experiment (directory, Outcome) rows and their Metrics. """
    rows = []
    for directory, record in load_experiments(root):
        alerts = experiment_alerts(directory, approach)
        rows.append((directory, score(alerts, record, delta_t_us, grace_us)))
    metrics = aggregate(x[1] for x in rows)
    logger.info('%s over %d experiment(s): F1 %.3f' % (approach, len(rows),
                metrics.f1))
    return rows, metrics


def _sweep(experiments, variants, grace_us):
    """ Run every (key, approach, models, cfg) variant over each experiment
    trace, loading each trace only once. """
    outcomes = collections.OrderedDict((x[0], []) for x in variants)
    for directory, record in load_experiments(experiments):
        trace = traceio.load_trace(record.trace_path)
        for key, approach, models, cfg in variants:
            alerts = run_approach(approach, models, trace, cfg)
            outcomes[key].append(score(alerts, record, cfg.delta_t_us,
                                       grace_us))
    return [(key, aggregate(x)) for key, x in outcomes.items()]


def sweep_delta_t(corpus, experiments, values, cfg=None):
    """ Re-mine and re-monitor for every time window in `values` (seconds).
    Returns (delta_t_s, Metrics) rows. """
    cfg = cfg or config.GlobalConfig()
    values = list(values)
    if not values:
        raise errors.InvalidConfig('The time window sweep needs values')
    corpus = list(corpus)
    selector = fields.FieldSelectorConfig(cfg.eps1, cfg.eps2)
    selected, _ = fields.select_fields(corpus, selector)
    variants = []
    for value in values:
        window = cfg._replace(delta_t_s=float(value)).validate()
        mining = patterns.MiningConfig(window.delta_t_us, selected)
        models = Models(patterns.mine_rules(corpus, mining), None, None)
        variants.append((window.delta_t_s, MR, models, window))
    return _sweep(experiments, variants, cfg.grace_us)


def sweep_baselines(corpus, experiments, approach, values, cfg=None):
    """ Sensitivity of a baseline to its parameter: the n-gram size for UN
    and the probability threshold for PM. """
    cfg = cfg or config.GlobalConfig()
    values = list(values)
    if not values:
        raise errors.InvalidConfig('The baseline sweep needs values')
    corpus = list(corpus)
    variants = []
    for value in values:
        if approach == UN:
            variant = cfg._replace(n=int(value)).validate()
            models = Models(None, baselines.ngram_train(corpus, variant.n),
                            None)
        elif approach == PM:
            variant = cfg._replace(pm_threshold=float(value)).validate()
            if not variants:
                vmm = baselines.vmm_train(corpus, cfg.max_order)
            models = Models(None, None, vmm)
        else:
            raise errors.InvalidConfig('Only %s and %s can be swept' % (UN,
                                       PM))
        variants.append((value, approach, models, variant))
    return _sweep(experiments, variants, cfg.grace_us)


def report(approach, metrics, rows=(), cfg=None):
    cfg = cfg or config.GlobalConfig()
    doc = collections.OrderedDict((
        ('approach', approach),
        ('delta_t_s', cfg.delta_t_s),
        ('grace_s', cfg.grace_s),
        ('metrics', metrics.as_dict()),
        ('experiments', [collections.OrderedDict((
            ('experiment', os.path.basename(directory)),
            ('label', outcome.label),
            ('detection_latency_us', outcome.detection_latency_us),
        )) for directory, outcome in rows]),
    ))
    return doc


def write_report(doc, path):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(doc, f, indent=2)
        f.write('\n')
