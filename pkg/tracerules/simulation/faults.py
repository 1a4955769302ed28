"""
Fault injection on top of the workload generator.

A fault hits one execution of one operation.  Its manifestation only touches
that execution and uses a random stream of its own, so the rest of the trace
is exactly the fault-free trace of the same seed.
"""

import logging
import os
import random
from . import workload
from .truth import (FaultSpec, THROW_EXCEPTION, WRONG_RETURN, WRONG_PARAM,
                    FAULT_KINDS)
from .. import errors, events, traceio

logger = logging.getLogger(__name__)


def _target(config, executions, fault):
    if fault.target_op not in config.catalog.operations:
        raise errors.UnknownTarget('Unknown operation: %s' % fault.target_op)
    for i, x in enumerate(executions):
        if x.op != fault.target_op or x.tenant != fault.target_tenant:
            continue
        if x.steps[0].event.ts_us <= fault.activation_us <= \
           x.steps[-1].event.ts_us:
            return i
    raise errors.UnknownTarget('No execution of %s by tenant %s spans %d' % (
                               fault.target_op, fault.target_tenant,
                               fault.activation_us))


def _truncate(steps, activation_us):
    kept = []
    removed = []
    for x in steps:
        if x.role == workload.RPC_CALL and x.event.ts_us >= activation_us:
            removed.append(x.event.ts_us)
        else:
            kept.append(x)
    return kept, min(removed) if removed else None


def _swap_pairs(steps, activation_us):
    """ Consecutive pairs of distinct fixed RPC events that follow the
    activation and whose order is not already free. """
    fixed = [i for i, x in enumerate(steps) if x.role == workload.RPC_CALL
             and x.fixed and not x.shuffled and
             x.event.ts_us >= activation_us]
    return [(a, b) for a, b in zip(fixed, fixed[1:])
            if steps[a].event.etype != steps[b].event.etype]


def _swap(steps, pair):
    a, b = pair
    steps = list(steps)
    ts_a = steps[a].event.ts_us
    ts_b = steps[b].event.ts_us
    steps[a] = steps[a]._replace(event=steps[a].event._replace(ts_us=ts_b))
    steps[b] = steps[b]._replace(event=steps[b].event._replace(ts_us=ts_a))
    steps.sort(key=lambda x: x.event.ts_us)
    return steps, ts_a


def _throw(config, op, steps, activation_us, rng):
    model = config.catalog.faults
    steps, first = _truncate(steps, activation_us)
    steps = [x for x in steps if x.role != workload.POLL]
    ts = activation_us + workload._us(rng, model.rest_error_delay_s)
    error = events.Event(ts, events.REST, op.poll or op.request,
                         status=model.error_status)
    steps.append(workload.Scheduled(error, steps[0].session, workload.POLL,
                                    True, False))
    return steps, ts if first is None else first


def manifest(config, fault, steps, rng):
    """ Apply a fault to the steps of its target execution and return the
    new steps with the timestamp of the first missing or corrupted event. """
    op = config.catalog.operations[fault.target_op]
    activation = fault.activation_us
    if fault.kind == THROW_EXCEPTION:
        return _throw(config, op, steps, activation, rng)
    if fault.kind == WRONG_PARAM and \
       rng.random() < config.catalog.faults.swap_probability:
        pairs = _swap_pairs(steps, activation)
        if pairs:
            return _swap(steps, rng.choice(pairs))
    return _truncate(steps, activation)


def inject(config, fault, benign_probability=None):
    """ Generate the trace of `config` with `fault` applied.  With the
    benign probability the fault has no visible effect at all. """
    executions, beats = workload.schedule(config)
    index = _target(config, executions, fault)
    rng = random.Random('%d/fault/%s/%s/%d/%d' % (config.seed, fault.kind,
                        fault.target_op, fault.target_tenant,
                        fault.activation_us))
    if benign_probability is None:
        benign_probability = config.catalog.faults.benign_probability
    if rng.random() < benign_probability:
        logger.debug('Benign injection of %s' % (fault,))
        return workload.assemble(config, executions, beats, fault=fault)
    target = executions[index]
    steps, first_failure = manifest(config, fault, target.steps, rng)
    executions[index] = target._replace(steps=steps)
    return workload.assemble(config, executions, beats, fault=fault,
                             first_failure_us=first_failure)


def covered_targets(trace, truth):
    """ (operation, tenant) pairs with an execution that has RPC events
    after its head. """
    targets = set()
    for session, indexes in workload.session_spans(trace, truth).items():
        rpc = [x for x in indexes if trace.events[x].is_rpc]
        if len(rpc) > 1:
            tenant, op, _ = workload.parse_session(session)
            targets.add((op, tenant))
    return sorted(targets)


def first_execution(trace, truth, op, tenant):
    """ Event indexes of the earliest execution of `op` by `tenant`. """
    for session, indexes in workload.session_spans(trace, truth).items():
        t, name, _ = workload.parse_session(session)
        if (name, t) == (op, tenant):
            return indexes
    raise errors.UnknownTarget('Tenant %s never runs %s' % (tenant, op))


def _plan(config, rng):
    ops = [x for x in config.catalog.covered_ops()
           if config.tenants_running(x)]
    combos = [(kind, op) for kind in FAULT_KINDS for op in ops]
    if not combos:
        raise errors.InvalidConfig('No covered operation to inject into')
    rng.shuffle(combos)
    return combos


def _pick_fault(config, trace, truth, combos, start, rng):
    targets = covered_targets(trace, truth)
    for i in range(len(combos)):
        kind, op = combos[(start + i) % len(combos)]
        tenants = [t for o, t in targets if o == op]
        if not tenants:
            continue
        tenant = rng.choice(tenants)
        indexes = first_execution(trace, truth, op, tenant)
        rpc = [x for x in indexes if trace.events[x].is_rpc]
        activation = trace.events[rng.choice(rpc[1:])].ts_us
        subsystem = config.catalog.operations[op].subsystem
        return FaultSpec(kind, op, tenant, activation, subsystem=subsystem)
    raise errors.UnknownTarget('No covered target in the generated trace')


def iter_campaign(config, n_experiments, seed, out_dir):
    """ Generate experiments one at a time, yielding each directory. """
    if not isinstance(n_experiments, int) or n_experiments < 1:
        raise errors.InvalidConfig('A campaign needs at least one '
                                   'experiment: %r' % n_experiments)
    rng = random.Random('%d/campaign' % seed)
    combos = _plan(config, rng)
    os.makedirs(out_dir, exist_ok=True)
    for i in range(n_experiments):
        exp_config = config._replace(seed=rng.getrandbits(32))
        trace, truth = workload.generate(exp_config)
        fault = _pick_fault(exp_config, trace, truth, combos, i, rng)
        trace, truth = inject(exp_config, fault)
        path = os.path.join(out_dir, 'exp-%04d' % i)
        os.makedirs(path, exist_ok=True)
        trace_path = os.path.join(path, traceio.TRACE_FILE)
        traceio.write_trace(trace, trace_path)
        record = traceio.ExperimentRecord(trace_path, truth.t_start_us, fault,
                                          truth.first_failure_us)
        traceio.write_experiment(record, os.path.join(path,
                                 traceio.EXPERIMENT_FILE))
        logger.info('Experiment %d: %s on %s/%d, %s' % (i, fault.kind,
                    fault.target_op, fault.target_tenant, 'failed' if
                    truth.failed else 'benign'))
        yield path


def campaign(config, n_experiments, seed, out_dir):
    return list(iter_campaign(config, n_experiments, seed, out_dir))

