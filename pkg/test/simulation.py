import collections
import json
import os
import random
import tempfile
import unittest
from tracerules import errors, events, traceio
from tracerules.mining import classify, fields, patterns
from tracerules.simulation import catalog, faults, truth, workload

SECOND = 1000000


def config(seed=0, duration_s=600, **kwargs):
    return workload.WorkloadConfig(duration_us=duration_s * SECOND, seed=seed,
                                   **kwargs)


class AlwaysLow(random.Random):
    """ Makes every probability draw succeed. """

    def random(self):
        return 0.0


class Catalog(unittest.TestCase):

    def doc(self):
        with open(catalog.DEFAULT_CATALOG) as f:
            return json.load(f)

    def test_default(self):
        cat = catalog.load_catalog()
        self.assertIs(cat, catalog.load_catalog())
        self.assertEqual(len(cat.operations), 11)
        self.assertEqual(len(cat.tenants), 10)
        self.assertEqual(len(set(cat.tenants)), 6)
        self.assertNotIn('create_image', cat.covered_ops())
        self.assertIn('create_volume', cat.covered_ops())
        volume = cat.operations['create_volume']
        self.assertEqual(volume.head.name, 'cinder-scheduler_create_volume')
        self.assertEqual(volume.subsystem, 'cinder')

    def test_tenants_running(self):
        cat = catalog.load_catalog()
        self.assertEqual(config().tenants_running('attach_volume'), [9])
        self.assertEqual(cat.profile_of(12), cat.tenants[2])

    def test_unknown_profile_operation(self):
        doc = self.doc()
        doc['profiles']['depl'].append('launch_rocket')
        self.assertRaises(errors.InvalidConfig, catalog.parse_catalog, doc)

    def test_bad_hop(self):
        doc = self.doc()
        doc['operations']['delete_instance']['hops'][0]['slots'].pop()
        self.assertRaises(errors.InvalidConfig, catalog.parse_catalog, doc)

    def test_variant_head(self):
        doc = self.doc()
        slots = doc['operations']['delete_instance']['hops'][0]['slots']
        slots[0] = [slots[0], slots[1]]
        self.assertRaises(errors.InvalidConfig, catalog.parse_catalog, doc)

    def test_bad_range(self):
        doc = self.doc()
        doc['timing']['think_s'] = [45, 15]
        self.assertRaises(errors.InvalidConfig, catalog.parse_catalog, doc)

    def test_bad_probability(self):
        doc = self.doc()
        doc['faults']['benign_probability'] = 1.5
        self.assertRaises(errors.InvalidConfig, catalog.parse_catalog, doc)

    def test_missing_section(self):
        doc = self.doc()
        del doc['body']
        with self.assertRaises(errors.InvalidConfig) as cm:
            catalog.parse_catalog(doc, path='mine.json')
        self.assertTrue(str(cm.exception).startswith('mine.json: '))


class Workload(unittest.TestCase):

    def test_config_validation(self):
        self.assertRaises(errors.InvalidConfig, workload.WorkloadConfig,
                          tenants=-1)
        self.assertRaises(errors.InvalidConfig, workload.WorkloadConfig,
                          duration_us=0)
        self.assertRaises(errors.InvalidConfig, workload.WorkloadConfig,
                          tenants=2, profiles=['depl'])
        self.assertRaises(errors.InvalidConfig, workload.WorkloadConfig,
                          tenants=1, profiles=['nothing'])

    def test_deterministic(self):
        a, truth_a = workload.generate(config(seed=3))
        b, truth_b = workload.generate(config(seed=3))
        self.assertEqual(a, b)
        self.assertEqual(truth_a, truth_b)
        c, _ = workload.generate(config(seed=4))
        self.assertNotEqual(a.events, c.events)

    def test_default_volume(self):
        """ The default workload shows about 89 event types and 31 body
        fields per RPC event, give or take half. """
        trace, _ = workload.generate(workload.WorkloadConfig())
        n_types = len(set(x.etype for x in trace.events))
        rpc = trace.rpc_events()
        n_fields = sum(len(x.body) for x in rpc) / len(rpc)
        self.assertTrue(89 * 0.5 <= n_types <= 89 * 1.5, n_types)
        self.assertTrue(31 * 0.5 <= n_fields <= 31 * 1.5, n_fields)

    def test_sorted_and_valid(self):
        trace, gt = workload.generate(config())
        times = [x.ts_us for x in trace.events]
        self.assertEqual(times, sorted(times))
        for event in trace.events:
            event.validate()
            self.assertEqual(events.status_class(event) in
                             (events.OK, events.NOT_REST), True)
        self.assertEqual(len(gt.sessions), len(trace.events))
        self.assertIsNone(gt.first_failure_us)
        self.assertEqual(gt.t_start_us, workload.DEFAULT_START_US)

    def test_no_hidden_ids(self):
        cat = catalog.load_catalog()
        layout = cat.body
        allowed = {layout.request_field, layout.chained_field, 'method'}
        allowed.update(layout.tenant_fields, layout.filler_fields,
                       layout.noise_fields)
        trace, gt = workload.generate(config())
        sessions = set(x for x in gt.sessions if x)
        for event in trace.events:
            self.assertTrue(set(event.body) <= allowed)
            self.assertFalse(set(event.body.values()) & sessions)
            record = json.loads(traceio.dump_event(event))
            self.assertTrue(set(record) <= traceio.TRACE_KEYS)

    def test_timing_bound(self):
        trace, gt = workload.generate(config(duration_s=1800))
        limit = catalog.load_catalog().timing.max_span_s * SECOND
        spans = workload.session_spans(trace, gt)
        self.assertTrue(spans)
        for indexes in spans.values():
            first = trace.events[indexes[0]].ts_us
            last = trace.events[indexes[-1]].ts_us
            self.assertLessEqual(last - first, limit)

    def test_sessions(self):
        trace, gt = workload.generate(config())
        spans = workload.session_spans(trace, gt)
        for session, indexes in spans.items():
            tenant, op, n = workload.parse_session(session)
            self.assertEqual(workload.session_id(tenant, op, n), session)
            first = trace.events[indexes[0]]
            self.assertEqual(first.kind, events.REST)
        beats = [x for x, s in zip(trace.events, gt.sessions) if s is None]
        self.assertTrue(beats)
        self.assertTrue(all(x.etype.method == 'report_state' for x in beats))

    def test_no_tenants(self):
        trace, gt = workload.generate(config(tenants=0))
        self.assertEqual(trace.events, ())

    def test_tenant_streams_independent(self):
        """ Adding tenants never changes what the first tenants do. """
        small, gt_small = workload.generate(config(tenants=2))
        big, gt_big = workload.generate(config(tenants=4))

        def tenant_events(trace, gt):
            return [e for e, s in zip(trace.events, gt.sessions)
                    if s and workload.parse_session(s)[0] < 2]
        self.assertEqual(tenant_events(small, gt_small),
                         tenant_events(big, gt_big))


class FieldsOfInterest(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.corpus = [workload.generate(config(seed=x))[0] for x in range(3)]

    def test_correlation_fields_selected(self):
        layout = catalog.load_catalog().body
        selected, _ = fields.select_fields(self.corpus)
        self.assertEqual(selected, {layout.request_field,
                                    layout.chained_field})

    def test_nothing_at_forty_percent(self):
        selected, _ = fields.select_fields(
            self.corpus, fields.FieldSelectorConfig(0.4, 0.4))
        self.assertEqual(selected, frozenset())


class DefaultRules(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        corpus = [workload.generate(config(seed=x, duration_s=1800))[0]
                  for x in range(3)]
        selected, _ = fields.select_fields(corpus)
        cfg = patterns.MiningConfig(35 * SECOND, selected)
        cls.rules = patterns.mine_rules(corpus, cfg)

    def test_rule_inventory(self):
        found = dict((x.head.name, x.kind) for x in self.rules.rules)
        self.assertEqual(found, {
            'neutron-server_create_network': classify.OCC,
            'nova-conductor_schedule_and_build_instances': classify.ORD,
            'cinder-scheduler_create_volume': classify.ORD,
            'nova-compute_reserve_block_device_name': classify.ORD,
            'neutron-server_create_security_group_rule': classify.ORD,
            'neutron-server_update_floatingip': classify.COUNT,
            'nova-consoleauth_delete_tokens_for_instance': classify.ORD,
        })

    def test_sizes(self):
        sizes = dict((x.head.name, x.size) for x in self.rules.rules)
        self.assertEqual(sizes['cinder-scheduler_create_volume'], 2)
        self.assertEqual(sizes['nova-conductor_schedule_and_build_instances'],
                         4)
        self.assertEqual(sizes['neutron-server_create_network'], 3)
        self.assertEqual(sizes['nova-consoleauth_delete_tokens_for_instance'],
                         3)
        lo, hi = sizes['neutron-server_update_floatingip']
        self.assertLess(lo, hi)

    def test_volume_rule(self):
        rule = self.rules.by_id()['ord-cinder-scheduler_create_volume']
        self.assertEqual([x.name for x in rule.body],
                         ['cinder-volume_create_volume'])


class Injection(unittest.TestCase):

    def setUp(self):
        self.config = config(seed=7)
        self.trace, self.truth = workload.generate(self.config)
        self.tenant = self.config.tenants_running('create_volume')[0]
        indexes = faults.first_execution(self.trace, self.truth,
                                         'create_volume', self.tenant)
        self.session = self.truth.sessions[indexes[0]]
        rpc = [x for x in indexes if self.trace.events[x].is_rpc]
        self.activation = self.trace.events[rpc[1]].ts_us

    def fault(self, kind, **kwargs):
        values = dict(kind=kind, target_op='create_volume',
                      target_tenant=self.tenant,
                      activation_us=self.activation, subsystem='cinder')
        values.update(kwargs)
        return truth.FaultSpec(**values)

    def others(self, trace, gt):
        return [e for e, s in zip(trace.events, gt.sessions)
                if s != self.session]

    def test_throw_exception(self):
        trace, gt = faults.inject(self.config,
                                  self.fault(truth.THROW_EXCEPTION),
                                  benign_probability=0)
        self.assertEqual(gt.first_failure_us, self.activation)
        self.assertEqual(self.others(trace, gt),
                         self.others(self.trace, self.truth))
        errors_ = [e for e in trace.events if events.is_error(e)]
        self.assertEqual(len(errors_), 1)
        self.assertEqual(errors_[0].status, 500)
        delay = errors_[0].ts_us - self.activation
        self.assertTrue(30 * SECOND <= delay <= 39 * SECOND)
        target = [e for e, s in zip(trace.events, gt.sessions)
                  if s == self.session]
        self.assertFalse([e for e in target if e.is_rpc and
                          e.ts_us >= self.activation])

    def test_wrong_return(self):
        trace, gt = faults.inject(self.config, self.fault(truth.WRONG_RETURN),
                                  benign_probability=0)
        self.assertEqual(gt.first_failure_us, self.activation)
        self.assertFalse([e for e in trace.events if events.is_error(e)])
        self.assertLess(len(trace.events), len(self.trace.events))
        self.assertEqual(self.others(trace, gt),
                         self.others(self.trace, self.truth))

    def test_benign(self):
        trace, gt = faults.inject(self.config, self.fault(truth.WRONG_RETURN),
                                  benign_probability=1)
        self.assertEqual(trace, self.trace)
        self.assertIsNone(gt.first_failure_us)
        self.assertEqual(gt.fault.kind, truth.WRONG_RETURN)

    def test_deterministic(self):
        fault = self.fault(truth.WRONG_PARAM)
        self.assertEqual(faults.inject(self.config, fault),
                         faults.inject(self.config, fault))

    def test_unknown_targets(self):
        self.assertRaises(errors.UnknownTarget, faults.inject, self.config,
                          self.fault(truth.WRONG_RETURN, target_op='nope'))
        self.assertRaises(errors.UnknownTarget, faults.inject, self.config,
                          self.fault(truth.WRONG_RETURN, activation_us=0))
        self.assertRaises(errors.UnknownTarget, faults.first_execution,
                          self.trace, self.truth, 'attach_volume', 0)

    def test_swap(self):
        cfg = self.config
        executions, _ = workload.schedule(cfg)
        target = [x for x in executions if x.op == 'create_instance'][0]
        head = [x for x in target.steps if x.role == workload.RPC_CALL][0]
        fault = truth.FaultSpec(truth.WRONG_PARAM, 'create_instance',
                                target.tenant, head.event.ts_us)
        steps, first = faults.manifest(cfg, fault, target.steps, AlwaysLow())
        before = [x.event.etype for x in target.steps]
        after = [x.event.etype for x in steps]
        self.assertNotEqual(before, after)
        self.assertEqual(collections.Counter(before),
                         collections.Counter(after))
        self.assertIn(first, [x.event.ts_us for x in target.steps])

    def test_covered_targets(self):
        targets = faults.covered_targets(self.trace, self.truth)
        ops = set(x[0] for x in targets)
        self.assertIn('create_volume', ops)
        self.assertNotIn('create_image', ops)
        self.assertTrue(ops <= set(catalog.load_catalog().covered_ops()))


class Campaigns(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def run_campaign(self, name):
        out = os.path.join(self.tmp.name, name)
        return faults.campaign(config(seed=1), 4, 1, out)

    def test_layout(self):
        paths = self.run_campaign('a')
        self.assertEqual([os.path.basename(x) for x in paths],
                         ['exp-0000', 'exp-0001', 'exp-0002', 'exp-0003'])
        kinds = set()
        for path in paths:
            record = traceio.load_experiment(os.path.join(
                path, traceio.EXPERIMENT_FILE))
            self.assertTrue(os.path.isfile(record.trace_path))
            self.assertIsNotNone(record.fault)
            kinds.add(record.fault.kind)
            trace = traceio.load_trace(record.trace_path)
            self.assertTrue(trace.events)
        self.assertTrue(kinds <= set(truth.FAULT_KINDS))

    def test_byte_reproducible(self):
        a = self.run_campaign('a')
        b = self.run_campaign('b')
        for x, y in zip(a, b):
            for name in (traceio.TRACE_FILE, traceio.EXPERIMENT_FILE):
                with open(os.path.join(x, name), 'rb') as f:
                    left = f.read()
                with open(os.path.join(y, name), 'rb') as f:
                    self.assertEqual(left, f.read())

    def test_needs_experiments(self):
        self.assertRaises(errors.InvalidConfig, faults.campaign, config(), 0,
                          0, self.tmp.name)
