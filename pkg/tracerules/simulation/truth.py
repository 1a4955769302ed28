"""
Ground truth records of simulated and injected workloads.
"""

import collections

THROW_EXCEPTION = 'THROW_EXCEPTION'
WRONG_RETURN = 'WRONG_RETURN'
WRONG_PARAM = 'WRONG_PARAM'
FAULT_KINDS = THROW_EXCEPTION, WRONG_RETURN, WRONG_PARAM


class FaultSpec(collections.namedtuple('FaultSpec', 'kind, target_op, '
                                       'target_tenant, activation_us, '
                                       'subsystem')):
    """ One injected fault.  The activation falls inside an execution of
    `target_op` by `target_tenant`. """

    __slots__ = ()

    def __new__(cls, kind, target_op, target_tenant, activation_us,
                subsystem=None):
        if kind not in FAULT_KINDS:
            raise ValueError('Invalid fault kind: %r' % kind)
        return super().__new__(cls, kind, target_op, target_tenant,
                               activation_us, subsystem)


class GroundTruth(collections.namedtuple('GroundTruth', 't_start_us, fault, '
                                         'first_failure_us, sessions')):
    """ What really happened in a generated trace.  `sessions` is aligned
    with the trace events and names the tenant session behind each event
    (None for background activity); it never reaches the miner or the
    monitor. """

    __slots__ = ()

    def __new__(cls, t_start_us, fault=None, first_failure_us=None,
                sessions=()):
        if first_failure_us is not None:
            if fault is None:
                raise ValueError('A failure requires an injected fault')
            if first_failure_us < fault.activation_us:
                raise ValueError('Failure precedes fault activation')
        return super().__new__(cls, t_start_us, fault, first_failure_us,
                               tuple(sessions))

    @property
    def failed(self):
        return self.first_failure_us is not None
