"""
The `tracerules` command line tool.
"""

from . import learn, root, score, simulate, watch
from .. import logging as tr_logging


def create_root():
    """ Build the command tree. """
    tracerules = root.TraceRules()
    for command in (learn.SelectFields, learn.Mine, learn.Rules,
                    simulate.Simulate, simulate.Inject, simulate.Campaign,
                    watch.Monitor, score.Evaluate, score.Sweep):
        tracerules.add_subcommand(command)
    return tracerules


def main(argv=None):
    """ Run the tool and return its exit status: 0 on success, 1 on usage
    errors and 2 on data errors. """
    tracerules = create_root()
    tracerules.get_or_create_session()
    try:
        args = tracerules.argparser.parse_args(argv)
    except SystemExit as e:
        return root.EXIT_USAGE if e.code else 0
    tr_logging.configure(args.log_level)
    try:
        tracerules(args=args)
    except SystemExit as e:
        if e.code is None:
            return 0
        return e.code if isinstance(e.code, int) else root.EXIT_USAGE
    return 0
