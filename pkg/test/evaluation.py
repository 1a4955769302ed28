import json
import os
import tempfile
import unittest
from tracerules import errors, evaluation, events, monitor, traceio
from tracerules.config import GlobalConfig
from tracerules.simulation import truth
from .events import rest
from .patterns import hand_corpus

SECOND = 1000000


def alert(ts):
    return monitor.FailureAlert('r', monitor.TIMEOUT, ts, 1)


def fault(activation_us=100):
    return truth.FaultSpec(truth.THROW_EXCEPTION, 'create_volume', 0,
                           activation_us)


def failed(at=100, t_start=0):
    return truth.GroundTruth(t_start, fault(at), at)


def clean(t_start=0):
    return truth.GroundTruth(t_start)


class Scoring(unittest.TestCase):

    def score(self, alerts, gt):
        return evaluation.score(alerts, gt, 10, grace_us=5)

    def test_no_failure(self):
        self.assertEqual(self.score([], clean()).label, evaluation.TN)
        self.assertEqual(self.score([alert(3)], clean()).label, evaluation.FP)

    def test_missed(self):
        self.assertEqual(self.score([], failed()).label, evaluation.FN)

    def test_early_alert(self):
        outcome = self.score([alert(99), alert(101)], failed())
        self.assertEqual(outcome, evaluation.Outcome(evaluation.FP))

    def test_detected(self):
        outcome = self.score([alert(100)], failed(t_start=40))
        self.assertEqual(outcome, evaluation.Outcome(evaluation.TP, 60))

    def test_window_and_grace(self):
        self.assertEqual(self.score([alert(115)], failed()).label,
                         evaluation.TP)
        self.assertEqual(self.score([alert(116)], failed()).label,
                         evaluation.FN)

    def test_unsorted(self):
        self.assertRaises(errors.UnsortedAlerts, self.score,
                          [alert(120), alert(110)], failed())

    def test_experiment_record(self):
        record = traceio.ExperimentRecord('trace.jsonl', 0, fault(), 100)
        self.assertEqual(self.score([alert(105)], record).label,
                         evaluation.TP)

    def test_outcome_validation(self):
        self.assertRaises(ValueError, evaluation.Outcome, 'XX')
        self.assertRaises(ValueError, evaluation.Outcome, evaluation.TP)
        self.assertRaises(ValueError, evaluation.Outcome, evaluation.FN, 5)


class Aggregation(unittest.TestCase):

    def test_precision_only_errors(self):
        outcomes = [evaluation.Outcome(evaluation.TP, 10)] * 87 + \
            [evaluation.Outcome(evaluation.FP)] * 13
        metrics = evaluation.aggregate(outcomes)
        self.assertAlmostEqual(metrics.precision, 0.87)
        self.assertEqual(metrics.recall, 1.0)
        self.assertAlmostEqual(metrics.accuracy, 0.87)
        self.assertEqual(metrics.mean_latency_us, 10)
        self.assertEqual(metrics.total, 100)

    def test_all_negative(self):
        metrics = evaluation.aggregate([evaluation.Outcome(evaluation.TN)] *
                                       4)
        self.assertEqual((metrics.precision, metrics.recall, metrics.f1),
                         (0, 0, 0))
        self.assertEqual(metrics.accuracy, 1.0)
        self.assertIsNone(metrics.mean_latency_us)

    def test_balanced(self):
        metrics = evaluation.aggregate([
            evaluation.Outcome(evaluation.TP, 2),
            evaluation.Outcome(evaluation.FP),
            evaluation.Outcome(evaluation.FN)])
        self.assertEqual((metrics.precision, metrics.recall, metrics.f1),
                         (0.5, 0.5, 0.5))
        self.assertAlmostEqual(metrics.accuracy, 1 / 3)

    def test_mixed(self):
        labels = [evaluation.TP] * 3 + [evaluation.FP] + \
            [evaluation.FN] * 2 + [evaluation.TN] * 4
        metrics = evaluation.aggregate(
            evaluation.Outcome(x, 1 if x == evaluation.TP else None)
            for x in labels)
        self.assertEqual((metrics.tp, metrics.fp, metrics.fn, metrics.tn),
                         (3, 1, 2, 4))
        self.assertAlmostEqual(metrics.precision, 0.75)
        self.assertAlmostEqual(metrics.recall, 0.6)
        self.assertAlmostEqual(metrics.f1, 2 / 3)
        self.assertAlmostEqual(metrics.accuracy, 0.7)
        self.assertIs(type(metrics.f1), float)

    def test_empty(self):
        self.assertRaises(errors.EmptySet, evaluation.aggregate, [])

    def test_as_dict(self):
        metrics = evaluation.aggregate([evaluation.Outcome(evaluation.TN)])
        self.assertEqual(list(metrics.as_dict()), list(metrics._fields))


class Campaign(unittest.TestCase):
    """ Three hand made experiments: a detected failure, a clean run and a
    benign fault with a spurious client error. """

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = self.tmp.name
        self.add('exp-0000', [
            rest(SECOND, 'cinder-api', 'post_volumes'),
            rest(40 * SECOND, 'cinder-api', 'get_volume', status=500)],
            fault(10 * SECOND), 10 * SECOND)
        self.add('exp-0001', [rest(SECOND, 'cinder-api', 'post_volumes')])
        self.add('exp-0002', [
            rest(SECOND, 'nova-api', 'post_servers'),
            rest(2 * SECOND, 'nova-api', 'get_server', status=404)],
            fault(SECOND))

    def tearDown(self):
        self.tmp.cleanup()

    def add(self, name, evs, fault=None, failure=None):
        path = os.path.join(self.root, name)
        os.mkdir(path)
        trace_path = os.path.join(path, traceio.TRACE_FILE)
        traceio.write_trace(events.Trace.sorted(evs, name), trace_path)
        record = traceio.ExperimentRecord(trace_path, 0, fault, failure)
        traceio.write_experiment(record, os.path.join(
            path, traceio.EXPERIMENT_FILE))

    def monitor(self, approach=evaluation.REST_ONLY):
        models = evaluation.Models(None, None, None)
        return evaluation.monitor_campaign(self.root, approach, models)

    def test_monitor_writes_alerts(self):
        written = self.monitor()
        self.assertEqual([os.path.basename(x) for x in written],
                         ['alerts.rest-only.jsonl'] * 3)
        alerts = traceio.load_alerts(written[0])
        self.assertEqual(alerts, [monitor.FailureAlert(
            monitor.REST_RULE_ID, monitor.REST_ERROR, 40 * SECOND, 1)])

    def test_evaluate(self):
        self.monitor()
        rows, metrics = evaluation.evaluate_campaign(
            self.root, evaluation.REST_ONLY, 35 * SECOND, 5 * SECOND)
        self.assertEqual([x[1].label for x in rows], [
            evaluation.TP, evaluation.TN, evaluation.FP])
        self.assertEqual(rows[0][1].detection_latency_us, 40 * SECOND)
        self.assertEqual((metrics.precision, metrics.recall), (0.5, 1.0))
        self.assertAlmostEqual(metrics.accuracy, 2 / 3)

    def test_late_alert_is_missed(self):
        self.monitor()
        rows, _ = evaluation.evaluate_campaign(
            self.root, evaluation.REST_ONLY, 20 * SECOND, 5 * SECOND)
        self.assertEqual(rows[0][1].label, evaluation.FN)

    def test_combined_from_parts(self):
        self.monitor()
        for directory in traceio.experiment_dirs(self.root):
            traceio.write_alerts([], traceio.alerts_path(directory,
                                                         evaluation.MR))
        combined = evaluation.evaluate_campaign(
            self.root, evaluation.COMBINED, 35 * SECOND)[1]
        rest_only = evaluation.evaluate_campaign(
            self.root, evaluation.REST_ONLY, 35 * SECOND)[1]
        self.assertEqual(combined, rest_only)

    def test_missing_alerts(self):
        with self.assertRaises(errors.DataError) as cm:
            evaluation.evaluate_campaign(self.root, evaluation.UN,
                                         35 * SECOND)
        self.assertTrue(cm.exception.path.endswith('alerts.un.jsonl'))

    def test_missing_record(self):
        os.mkdir(os.path.join(self.root, 'exp-0003'))
        self.assertRaises(errors.DataError, evaluation.load_experiments,
                          self.root)

    def test_report(self):
        self.monitor()
        rows, metrics = evaluation.evaluate_campaign(
            self.root, evaluation.REST_ONLY, 35 * SECOND)
        doc = evaluation.report(evaluation.REST_ONLY, metrics, rows)
        path = os.path.join(self.root, 'report.json')
        evaluation.write_report(doc, path)
        with open(path) as f:
            loaded = json.load(f)
        self.assertEqual(loaded['approach'], 'rest-only')
        self.assertEqual(loaded['delta_t_s'], 35)
        self.assertEqual([x['experiment'] for x in loaded['experiments']],
                         ['exp-0000', 'exp-0001', 'exp-0002'])
        self.assertEqual(loaded['metrics']['tp'], 1)

    def test_sweep_delta_t(self):
        rows = evaluation.sweep_delta_t(hand_corpus(), self.root, [5, 20])
        self.assertEqual([x[0] for x in rows], [5.0, 20.0])
        for _, metrics in rows:
            self.assertEqual(metrics.total, 3)

    def test_sweep_baselines(self):
        rows = evaluation.sweep_baselines(hand_corpus(), self.root,
                                          evaluation.UN, [2, 3])
        self.assertEqual([x[0] for x in rows], [2, 3])
        rows = evaluation.sweep_baselines(hand_corpus(), self.root,
                                          evaluation.PM, [0.01, 0.5])
        self.assertEqual(len(rows), 2)

    def test_sweep_errors(self):
        self.assertRaises(errors.InvalidConfig, evaluation.sweep_delta_t,
                          hand_corpus(), self.root, [])
        self.assertRaises(errors.InvalidConfig, evaluation.sweep_baselines,
                          hand_corpus(), self.root, evaluation.MR, [1])


class Training(unittest.TestCase):

    def test_models(self):
        cfg = GlobalConfig(n=2)
        models = evaluation.train(hand_corpus(), [evaluation.UN], cfg)
        self.assertIsNone(models.rules)
        self.assertIsNone(models.vmm)
        self.assertEqual(models.ngram.n, 2)

    def test_rest_only_ignores_rpc(self):
        trace = hand_corpus()[0]
        models = evaluation.Models(None, None, None)
        self.assertEqual(evaluation.run_approach(evaluation.REST_ONLY, models,
                                                 trace), [])

    def test_unknown_approach(self):
        self.assertRaises(ValueError, evaluation.run_approach, 'magic',
                          evaluation.Models(None, None, None),
                          hand_corpus()[0])
