"""
Offline stages: field selection and rule mining.
"""

import shellish
from . import root
from .. import traceio
from ..mining import fields, patterns


class SelectFields(root.TraceRulesCommand):
    """ Select the body fields that correlate events.

    A field is selected when, in every trace, enough of its values propagate
    to other events (P1 >= eps1) and its values are diverse enough
    (P2 >= eps2).  With --sweep the number of selected fields is reported for
    every threshold pair instead. """

    name = 'select-fields'
    tunables = 'eps1', 'eps2'

    def setup_args(self, parser):
        self.add_argument('--traces', required=True, metavar='DIR',
                          help='Directory of fault-free *.jsonl traces.')
        self.add_argument('--report', '--out', dest='report', metavar='FILE',
                          help='Write the field report to this JSON file.')
        self.add_argument('--sweep', type=root.csv_values(float),
                          metavar='VALUES', help='Comma separated thresholds '
                          'to sweep, eg. 0.1,0.2,0.3,0.4.')
        super().setup_args(parser)

    def run(self, args):
        cfg = self.global_config(args)
        corpus = self.load_corpus(args.traces)
        if args.sweep:
            rows = fields.threshold_sweep(corpus, args.sweep)
            shellish.tabulate(rows, headers=['eps1', 'eps2', 'Selected'])
            return rows
        selector = fields.FieldSelectorConfig(cfg.eps1, cfg.eps2)
        selected, reports = fields.select_fields(corpus, selector)
        table = [(x.field, x.selected, _worst(x.per_trace_p1),
                  _worst(x.per_trace_p2)) for x in reports]
        shellish.tabulate(table, headers=['Field', 'Selected', 'Min P1',
                                          'Min P2'])
        if args.report:
            traceio.write_fields(selected, reports, args.report, selector)
        return selected


def _worst(scores):
    if None in scores:
        return 'absent'
    return '%.3f' % min(scores)


class Mine(root.TraceRulesCommand):
    """ Mine monitoring rules from fault-free traces.

    Fields of interest come from a field report written by select-fields, or
    are selected on the fly with the eps1/eps2 thresholds. """

    name = 'mine'
    tunables = 'delta_t_s', 'eps1', 'eps2'

    def setup_args(self, parser):
        self.add_argument('--traces', required=True, metavar='DIR',
                          help='Directory of fault-free *.jsonl traces.')
        self.add_argument('--out', required=True, metavar='FILE',
                          help='Rule set JSON file to write.')
        self.add_argument('--fields', metavar='FILE', help='Field report '
                          'written by select-fields.')
        super().setup_args(parser)

    def run(self, args):
        cfg = self.global_config(args)
        corpus = self.load_corpus(args.traces)
        if args.fields:
            selected = traceio.load_fields(args.fields)
        else:
            selector = fields.FieldSelectorConfig(cfg.eps1, cfg.eps2)
            selected, _ = fields.select_fields(corpus, selector)
        mining = patterns.MiningConfig(cfg.delta_t_us, selected)
        rules = patterns.mine_rules(corpus, mining)
        traceio.write_ruleset(rules, args.out)
        show_rules(rules)
        return rules


class Rules(root.TraceRulesCommand):
    """ Show the rules of a rule set file. """

    name = 'rules'

    def setup_args(self, parser):
        self.add_argument('ruleset', metavar='FILE', help='Rule set JSON '
                          'file.')
        self.add_argument('--traces', metavar='DIR', help='Traces whose '
                          'services resolve event names with underscores.')

    def run(self, args):
        services = None
        if args.traces:
            services = root.corpus_services(self.load_corpus(args.traces))
        rules = traceio.load_ruleset(args.ruleset, services=services)
        show_rules(rules)
        return rules


def show_rules(rules):
    if not rules.rules:
        shellish.vtmlprint('<b>No rules</b>')
        return
    shellish.tabulate([x.describe() for x in rules.rules])
