"""
Workload simulation and fault injection commands.
"""

import os
import random
import shellish
import sys
from . import root
from .. import errors, traceio
from ..simulation import catalog, faults, truth, workload


class SimulationCommand(root.TraceRulesCommand):

    tunables = 'seed',

    def setup_args(self, parser):
        self.add_argument('--catalog', metavar='FILE', help='Operation '
                          'template catalog; the packaged one by default.')
        self.add_argument('--tenants', type=int, default=10,
                          help='Number of concurrent tenants.')
        self.add_argument('--duration-s', type=float, default=1800,
                          help='Length of the workload in seconds.')
        super().setup_args(parser)

    def workload_config(self, args, seed=None):
        cfg = self.global_config(args)
        return workload.WorkloadConfig(
            tenants=args.tenants,
            duration_us=int(args.duration_s * 1000000),
            seed=cfg.seed if seed is None else seed,
            catalog=catalog.load_catalog(args.catalog))


class Simulate(SimulationCommand):
    """ Generate fault-free multi-tenant traces.

    Trace i of the corpus is generated with seed + i. """

    name = 'simulate'

    def setup_args(self, parser):
        self.add_argument('--out', required=True, metavar='DIR',
                          help='Directory receiving trace-NNN.jsonl files.')
        self.add_argument('--traces', type=int, default=10,
                          help='Number of traces to generate.')
        super().setup_args(parser)

    def run(self, args):
        base = self.global_config(args).seed
        os.makedirs(args.out, exist_ok=True)
        paths = []
        for i in range(args.traces):
            trace, _ = workload.generate(self.workload_config(args,
                                                              seed=base + i))
            path = os.path.join(args.out, 'trace-%03d.jsonl' % i)
            traceio.write_trace(trace, path)
            paths.append(path)
        shellish.vtmlprint('Wrote <b>%d</b> trace(s) to %s' % (len(paths),
                           args.out))
        return paths


class Inject(SimulationCommand):
    """ Generate one fault injection experiment.

    Without --activation-us the fault activates at a random RPC event, after
    the head, of the first execution of the operation by the tenant. """

    name = 'inject'

    def setup_args(self, parser):
        self.add_argument('--out', required=True, metavar='DIR',
                          help='Experiment directory to write.')
        self.add_argument('--kind', required=True, choices=truth.FAULT_KINDS,
                          help='Fault type.')
        self.add_argument('--op', required=True, help='Target operation.')
        self.add_argument('--tenant', type=int, required=True,
                          help='Target tenant index.')
        self.add_argument('--activation-us', type=int, help='Activation '
                          'timestamp in microseconds.')
        self.add_argument('--benign-probability', type=float,
                          help='Override the catalog probability that the '
                          'fault has no effect.')
        super().setup_args(parser)

    def run(self, args):
        config = self.workload_config(args)
        activation = args.activation_us
        if activation is None:
            trace, gt = workload.generate(config)
            indexes = faults.first_execution(trace, gt, args.op, args.tenant)
            rpc = [x for x in indexes if trace.events[x].is_rpc]
            if len(rpc) < 2:
                raise errors.UnknownTarget('%s has no RPC event after its '
                                           'head' % args.op)
            rng = random.Random('%d/activation' % config.seed)
            activation = trace.events[rng.choice(rpc[1:])].ts_us
        op = config.catalog.operations.get(args.op)
        fault = truth.FaultSpec(args.kind, args.op, args.tenant, activation,
                                subsystem=op.subsystem if op else None)
        trace, gt = faults.inject(config, fault,
                                  benign_probability=args.benign_probability)
        os.makedirs(args.out, exist_ok=True)
        trace_path = os.path.join(args.out, traceio.TRACE_FILE)
        traceio.write_trace(trace, trace_path)
        record = traceio.ExperimentRecord(trace_path, gt.t_start_us, fault,
                                          gt.first_failure_us)
        traceio.write_experiment(record, os.path.join(args.out,
                                 traceio.EXPERIMENT_FILE))
        if gt.failed:
            shellish.vtmlprint('<b>%s</b> failure from %d' % (fault.kind,
                               gt.first_failure_us))
        else:
            shellish.vtmlprint('<dim>Benign injection</dim>')
        return record


class Campaign(SimulationCommand):
    """ Generate a fault injection campaign.

    Faults cycle over every fault kind and covered operation. """

    name = 'campaign'

    def setup_args(self, parser):
        self.add_argument('--out', required=True, metavar='DIR',
                          help='Directory receiving one directory per '
                          'experiment.')
        self.add_argument('--experiments', type=int, default=200,
                          help='Number of experiments.')
        super().setup_args(parser)

    def run(self, args):
        config = self.workload_config(args)
        stream = faults.iter_campaign(config, args.experiments, config.seed,
                                      args.out)
        if sys.stderr.isatty():
            ticks = shellish.progressbar(range(args.experiments),
                                         prefix='Experiments: ')
            stream = (x for _, x in zip(ticks, stream))
        paths = list(stream)
        shellish.vtmlprint('Wrote <b>%d</b> experiment(s) to %s' % (
                           len(paths), args.out))
        return paths
