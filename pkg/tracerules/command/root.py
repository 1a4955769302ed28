"""
Root command, shared command helpers and the session that maps failures to
exit codes.
"""

import shellish
import sys
from .. import config, errors, traceio
from .. import logging as tr_logging

EXIT_USAGE = 1
EXIT_DATA = 2

TUNABLES = {
    "delta_t_s": ('--delta-t-s', 'Time window, in seconds, of the mined '
                  'patterns and of the monitor timers.'),
    "eps1": ('--eps1', 'Minimum value propagation (P1) of a field of '
             'interest.'),
    "eps2": ('--eps2', 'Minimum value diversity (P2) of a field of '
             'interest.'),
    "n": ('--n', 'N-gram size of the unseen n-gram detector.'),
    "max_order": ('--max-order', 'Maximum context length of the Markov '
                  'detector.'),
    "pm_threshold": ('--pm-threshold', 'Probability below which the Markov '
                     'detector alerts.'),
    "seed": ('--seed', 'Random seed.'),
    "grace_s": ('--grace-s', 'Extra seconds after the time window in which '
                'a first alert still detects the failure.'),
}


class TraceRulesSession(shellish.Session):
    """ Data errors are reported as `path:line: message` and exit with 2;
    anything else keeps the stock traceback and exit status. """

    def handle_command_error(self, command, args, exc):
        if isinstance(exc, (errors.DataError, OSError)):
            if isinstance(exc, OSError) and exc.filename:
                message = '%s: %s' % (exc.filename, exc.strerror)
            else:
                message = str(exc)
            shellish.vtmlprint('<red>%s</red>' % message, file=sys.stderr)
            raise SystemExit(EXIT_DATA) from exc
        return super().handle_command_error(command, args, exc)


class TraceRulesCommand(shellish.Command):
    """ Base for the subcommands.  `tunables` names the global settings a
    command exposes as flags. """

    Session = TraceRulesSession
    tunables = ()

    def setup_args(self, parser):
        for key in self.tunables:
            self.add_tunable(key)

    def add_tunable(self, key):
        flag, help = TUNABLES[key]
        type_ = config.FIELDS[key][0]
        return self.add_argument(flag, dest=key, type=type_,
                                 env=config.env_name(key), help=help)

    def global_config(self, args):
        section = self.get_config(config.SECTION)
        overrides = dict((k, getattr(args, k, None)) for k in config.FIELDS)
        return config.resolve(section, **overrides)

    def load_corpus(self, directory):
        corpus = traceio.load_corpus(directory)
        shellish.vtmlprint('Loaded <b>%d</b> trace(s) from %s' % (
                           len(corpus), directory), file=sys.stderr)
        return corpus


def corpus_services(corpus):
    """ Every service seen in a corpus, for resolving rule names. """
    return frozenset().union(*(x.services() for x in corpus))


def csv_values(type_):
    """ argparse type for comma separated lists. """

    def convert(value):
        values = [type_(x) for x in value.split(',') if x.strip()]
        if not values:
            raise ValueError('empty list')
        return values
    convert.__name__ = '%s list' % type_.__name__
    return convert


class TraceRules(TraceRulesCommand):
    """ Mine session-free monitoring rules from fault-free traces and
    monitor concurrent workloads with them.

    Each stage of the pipeline is a subcommand that reads and writes files,
    so any stage can be rerun on its own. """

    name = 'tracerules'

    def setup_args(self, parser):
        self.add_argument('--log-level', choices=tr_logging.LEVELS,
                          default='WARNING', env='TRACERULES_LOG_LEVEL',
                          type=str.upper, help='Log verbosity.')

    def default_config(self):
        return config.defaults()
