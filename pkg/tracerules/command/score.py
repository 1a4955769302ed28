"""
Evaluation commands.
"""

import shellish
from . import root
from .. import evaluation

METRIC_HEADERS = ['Precision', 'Recall', 'F1', 'Accuracy', 'Latency (s)',
                  'TP', 'FP', 'FN', 'TN']


def metric_row(metrics):
    latency = metrics.mean_latency_us
    return [
        '%.3f' % metrics.precision,
        '%.3f' % metrics.recall,
        '%.3f' % metrics.f1,
        '%.3f' % metrics.accuracy,
        '-' if latency is None else '%.1f' % (latency / 1000000),
        metrics.tp,
        metrics.fp,
        metrics.fn,
        metrics.tn
    ]


class Evaluate(root.TraceRulesCommand):
    """ Score the stored alerts of a campaign.

    Only the first alert of each experiment counts: it is a true positive
    when it lands within the time window plus the grace period after the
    first failure. """

    name = 'evaluate'
    tunables = 'delta_t_s', 'grace_s'

    def setup_args(self, parser):
        self.add_argument('--experiments', required=True, metavar='DIR',
                          help='Campaign directory.')
        self.add_argument('--approach', choices=evaluation.APPROACHES,
                          default=evaluation.MR, help='Alert files to score.')
        self.add_argument('--report', metavar='FILE', help='Write a JSON '
                          'report.')
        self.add_argument('--experiment-table', action='store_true',
                          help='Also show the label of every experiment.')
        super().setup_args(parser)

    def run(self, args):
        cfg = self.global_config(args)
        rows, metrics = evaluation.evaluate_campaign(
            args.experiments, args.approach, cfg.delta_t_us, cfg.grace_us)
        if args.experiment_table:
            shellish.tabulate([(directory, x.label, '-' if
                                x.detection_latency_us is None else
                                '%.1f' % (x.detection_latency_us / 1000000))
                               for directory, x in rows],
                              headers=['Experiment', 'Label', 'Latency (s)'])
        shellish.tabulate([[args.approach] + metric_row(metrics)],
                          headers=['Approach'] + METRIC_HEADERS)
        if args.report:
            doc = evaluation.report(args.approach, metrics, rows, cfg)
            evaluation.write_report(doc, args.report)
        return metrics


class Sweep(root.TraceRulesCommand):
    """ Sensitivity analysis.

    For mr every time window of --delta-t-s is mined from --traces and
    monitored over --experiments.  For un and pm --values are the n-gram
    sizes or the probability thresholds. """

    name = 'sweep'
    tunables = 'eps1', 'eps2', 'n', 'max_order', 'grace_s'

    def setup_args(self, parser):
        self.add_argument('--traces', required=True, metavar='DIR',
                          help='Fault-free training traces.')
        self.add_argument('--experiments', required=True, metavar='DIR',
                          help='Campaign directory.')
        self.add_argument('--approach', default=evaluation.MR,
                          choices=(evaluation.MR, evaluation.UN,
                                   evaluation.PM), help='Approach to sweep.')
        self.add_argument('--delta-t-s', dest='delta_t_values',
                          type=root.csv_values(float), default=[5, 20, 35, 50],
                          metavar='VALUES', help='Comma separated time '
                          'windows in seconds for mr.')
        self.add_argument('--values', type=root.csv_values(float),
                          metavar='VALUES', help='Comma separated parameter '
                          'values for un or pm.')
        self.add_argument('--report', metavar='FILE', help='Write a JSON '
                          'report.')
        super().setup_args(parser)

    def run(self, args):
        cfg = self.global_config(args)
        corpus = self.load_corpus(args.traces)
        if args.approach == evaluation.MR:
            key = 'delta_t_s'
            rows = evaluation.sweep_delta_t(corpus, args.experiments,
                                            args.delta_t_values, cfg)
        else:
            if not args.values:
                raise SystemExit('--values is required to sweep %s' %
                                 args.approach)
            key = 'n' if args.approach == evaluation.UN else 'pm_threshold'
            values = args.values
            if key == 'n':
                values = [int(x) for x in values]
            rows = evaluation.sweep_baselines(corpus, args.experiments,
                                              args.approach, values, cfg)
        shellish.tabulate([[value] + metric_row(x) for value, x in rows],
                          headers=[key] + METRIC_HEADERS)
        if args.report:
            doc = {
                "approach": args.approach,
                "parameter": key,
                "grace_s": cfg.grace_s,
                "rows": [dict(x.as_dict(), value=value)
                         for value, x in rows]
            }
            evaluation.write_report(doc, args.report)
        return rows
