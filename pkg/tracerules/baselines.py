"""
Session-unaware comparison detectors.

Both work on the sequence of canonical event-type names alone: unseen
n-grams (UN) and a variable-order Markov model with a probability threshold
(PM).  Multi-tenant traces are fed as the single interleaved sequence.
"""

import collections
import fractions
import logging
from . import errors
from .monitor import FailureAlert

logger = logging.getLogger(__name__)

UN_RULE_ID = 'un'
PM_RULE_ID = 'pm'
UNSEEN = 'unseen'
IMPROBABLE = 'improbable'

NgramModel = collections.namedtuple('NgramModel', 'n, dictionary')
VmmModel = collections.namedtuple('VmmModel', 'max_order, counts')


class DetectorConfig(collections.namedtuple('DetectorConfig', 'epsilon_pm, '
                                            'n, max_order')):

    __slots__ = ()

    def __new__(cls, epsilon_pm=0.01, n=3, max_order=3):
        if not 0 < epsilon_pm <= 1:
            raise errors.InvalidConfig('PM threshold must be within (0, 1]: '
                                       '%r' % epsilon_pm)
        if n < 1 or max_order < 1:
            raise errors.InvalidConfig('n-gram size and Markov order must be '
                                       'at least 1')
        return super().__new__(cls, epsilon_pm, n, max_order)


def _sequences(traces, what):
    sequences = [x.type_sequence() for x in traces]
    if not sequences:
        raise errors.EmptyCorpus('%s training needs at least one trace' % what)
    return sequences


def windows(sequence, n):
    return [tuple(sequence[i:i + n]) for i in range(len(sequence) - n + 1)]


def ngram_train(traces, n=3):
    """ Learn the dictionary of every n-gram seen in the training traces. """
    if n < 1:
        raise errors.InvalidConfig('n-gram size must be at least 1: %r' % n)
    dictionary = set()
    for sequence in _sequences(traces, 'n-gram'):
        dictionary.update(windows(sequence, n))
    logger.info('Learned %d distinct %d-grams' % (len(dictionary), n))
    return NgramModel(n, frozenset(dictionary))


def ngram_detect(model, trace):
    """ One alert per window absent from the dictionary, stamped with the
    window's last event. """
    alerts = []
    sequence = trace.type_sequence()
    for i, window in enumerate(windows(sequence, model.n)):
        if window not in model.dictionary:
            end = i + model.n - 1
            alerts.append(FailureAlert(UN_RULE_ID, UNSEEN,
                                       trace.events[end].ts_us, end + 1))
    return alerts


def vmm_train(traces, max_order=3):
    """ Count every (context, next) pair for contexts of length 0 through
    `max_order`. """
    if max_order < 1:
        raise errors.InvalidConfig('Markov order must be at least 1: %r' %
                                   max_order)
    counts = collections.defaultdict(collections.Counter)
    for sequence in _sequences(traces, 'Markov'):
        for i, symbol in enumerate(sequence):
            for length in range(0, min(i, max_order) + 1):
                counts[tuple(sequence[i - length:i])][symbol] += 1
    logger.info('Learned %d contexts up to order %d' % (len(counts),
                max_order))
    return VmmModel(max_order, dict(counts))


def vmm_prob(model, context, next):
    """ Probability of `next` after `context` using the longest suffix of
    the context after which `next` was observed.  Zero when it was never
    observed, not even after the empty context. """
    context = tuple(context)[-model.max_order:] if model.max_order else ()
    for length in range(len(context), -1, -1):
        suffix = context[len(context) - length:]
        following = model.counts.get(suffix)
        if following and following[next]:
            return fractions.Fraction(following[next],
                                      sum(following.values()))
    return fractions.Fraction(0)


def vmm_detect(model, trace, epsilon_pm=0.01):
    alerts = []
    sequence = trace.type_sequence()
    for i, symbol in enumerate(sequence):
        context = sequence[max(0, i - model.max_order):i]
        if vmm_prob(model, context, symbol) < epsilon_pm:
            alerts.append(FailureAlert(PM_RULE_ID, IMPROBABLE,
                                       trace.events[i].ts_us, i + 1))
    return alerts
