"""
Online stage: run a detector over a trace, a growing trace file or a whole
campaign.
"""

import shellish
import sys
from . import root
from .. import evaluation, monitor, traceio
from ..mining import classify


class Monitor(root.TraceRulesCommand):
    """ Detect failures in a trace.

    The mr approach enforces a mined rule set (--rules); un and pm train
    their models from fault-free traces (--train); rest-only only reports
    REST error codes and combined merges the mr and rest-only streams.

    With --experiments every experiment of a campaign is monitored and its
    alerts are stored next to the trace as alerts.<approach>.jsonl.  With
    --follow the input file is tailed and alerts are appended to --alerts as
    they are raised. """

    name = 'monitor'
    tunables = 'delta_t_s', 'n', 'max_order', 'pm_threshold'
    streaming = evaluation.MR, evaluation.REST_ONLY, evaluation.COMBINED

    def setup_args(self, parser):
        self.add_argument('--approach', choices=evaluation.APPROACHES,
                          default=evaluation.MR, help='Detector to run.')
        self.add_argument('--rules', metavar='FILE', help='Rule set written '
                          'by mine; needed by mr and combined.')
        self.add_argument('--train', metavar='DIR', help='Fault-free traces '
                          'to train un or pm with.')
        self.add_argument('--input', metavar='FILE', help='Trace to '
                          'monitor.')
        self.add_argument('--alerts', metavar='FILE', help='Alert file to '
                          'write; alerts are shown as a table otherwise.')
        self.add_argument('--experiments', metavar='DIR', help='Monitor '
                          'every experiment of a campaign.')
        self.add_argument('--follow', action='store_true', help='Keep '
                          'reading the input as it grows.')
        self.add_argument('--poll-s', type=float, default=1.0,
                          help='Seconds between reads while following.')
        self.add_argument('--idle-timeout-s', type=float, help='Stop '
                          'following after this many quiet seconds.')
        self.add_argument('--under-count-alerts', action='store_true',
                          help='Alert when a COUNT rule window closes with '
                          'fewer events than its minimum.')
        super().setup_args(parser)

    def run(self, args):
        if (args.input is None) == (args.experiments is None):
            raise SystemExit('Exactly one of --input and --experiments is '
                             'required')
        if args.follow and (args.input is None or
                            args.approach not in self.streaming):
            raise SystemExit('--follow needs --input and one of: %s' %
                             ', '.join(self.streaming))
        cfg = self.global_config(args)
        trace = None
        if not args.follow and args.input:
            trace = traceio.load_trace(args.input)
        models = self.models(args, cfg, trace)
        if args.experiments:
            paths = evaluation.monitor_campaign(
                args.experiments, args.approach, models, cfg,
                under_count_alerts=args.under_count_alerts)
            shellish.vtmlprint('Wrote <b>%d</b> %s alert file(s)' % (
                               len(paths), args.approach))
            return paths
        if args.follow:
            return self.follow(args, models, cfg)
        alerts = evaluation.run_approach(
            args.approach, models, trace, cfg,
            under_count_alerts=args.under_count_alerts)
        if args.alerts:
            traceio.write_alerts(alerts, args.alerts)
            shellish.vtmlprint('Wrote <b>%d</b> alert(s) to %s' % (
                               len(alerts), args.alerts), file=sys.stderr)
        else:
            show_alerts(alerts)
        return alerts

    def models(self, args, cfg, trace=None):
        """ Rule names are resolved against the services of the monitored
        trace when there is one. """
        approach = args.approach
        rules = None
        if approach in (evaluation.MR, evaluation.COMBINED):
            if not args.rules:
                raise SystemExit('--rules is required by %s' % approach)
            services = trace.services() if trace is not None else None
            rules = traceio.load_ruleset(args.rules, services=services)
        if approach in (evaluation.UN, evaluation.PM):
            if not args.train:
                raise SystemExit('--train is required by %s' % approach)
            return evaluation.train(self.load_corpus(args.train), [approach],
                                    cfg)
        return evaluation.Models(rules, None, None)

    def follow(self, args, models, cfg):
        """ The mr monitor already reports REST errors, so combined follows
        the same stream as mr. """
        if args.approach == evaluation.REST_ONLY:
            rules = classify.RuleSet(cfg.delta_t_us, ())
        else:
            rules = models.rules
        mon = monitor.compile(rules,
                              under_count_alerts=args.under_count_alerts)
        output = open(args.alerts, 'a', encoding='utf-8') if args.alerts \
            else None

        def on_alert(alert):
            if output is None:
                shellish.vtmlprint(describe_alert(alert))
            else:
                output.write(traceio.dump_alert(alert))
                output.write('\n')
                output.flush()
        mon.add_listener('alert', on_alert)
        try:
            with open(args.input, 'rb') as f:
                return monitor.follow(mon, f, path=args.input,
                                      poll_s=args.poll_s,
                                      idle_timeout_s=args.idle_timeout_s)
        finally:
            if output is not None:
                output.close()


def describe_alert(alert):
    return '<red>%s</red> <b>%s</b> at %d (occurrence %d)' % (
        alert.violation, alert.rule_id, alert.ts_us, alert.occurrence)


def show_alerts(alerts):
    if not alerts:
        shellish.vtmlprint('<green>No alerts</green>')
        return
    shellish.tabulate([x._asdict() for x in alerts])
