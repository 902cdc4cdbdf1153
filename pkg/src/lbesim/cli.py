"""Command line front end: run one scenario, a sweep, or a catalog
experiment, emitting CSV reports and optional traces."""

import argparse
import os
import sys

from . import harness


def _add_common(p):
    p.add_argument("--out", default=None, metavar="DIR",
                   help="write outputs into DIR (default: CSV to stdout)")
    p.add_argument("--format", choices=["csv"], default="csv")
    p.add_argument("--seed", type=int, default=None,
                   help="accepted but unused by the deterministic core")
    p.add_argument("--event-log", default=None, metavar="PATH",
                   help="debug event log (one line per event)")


def build_parser():
    ap = argparse.ArgumentParser(prog="lbesim")
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a single scenario config")
    p_run.add_argument("config")
    p_run.add_argument("--traces", action="store_true",
                       help="also emit per-flow cwnd and queue series")
    _add_common(p_run)

    p_sweep = sub.add_parser("sweep", help="run a sweep spec")
    p_sweep.add_argument("spec")
    _add_common(p_sweep)

    p_exp = sub.add_parser("experiment", help="run a catalog experiment")
    p_exp.add_argument("id", choices=harness.EXPERIMENT_IDS)
    p_exp.add_argument("--protocol", choices=harness.PROTOCOLS, default=None)
    _add_common(p_exp)
    return ap


def _event_logger(path):
    if path is None:
        return None, None
    fh = open(path, "w")
    return fh, lambda line: fh.write(line + "\n")


def _emit(text, out, filename):
    if out is None:
        sys.stdout.write(text)
    else:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, filename), "w") as fh:
            fh.write(text)


def cmd_run(args):
    with open(args.config) as fh:
        cfg = harness.load_scenario(fh.read())
    log_fh, log_fn = _event_logger(args.event_log)
    try:
        result = harness.run_scenario(
            cfg, traces=args.traces,
            scenario_id=os.path.basename(args.config), event_log=log_fn)
    finally:
        if log_fh:
            log_fh.close()
    header = ",".join(result.report.CSV_COLUMNS) + ",per_flow_throughput_bps...\n"
    _emit(header + result.report.csv_row() + "\n", args.out, "report.csv")
    if args.traces:
        outdir = args.out or "."
        os.makedirs(outdir, exist_ok=True)
        for fid, series in sorted(result.cwnd_traces.items()):
            with open(os.path.join(outdir, "flow%d_cwnd.csv" % fid), "w") as fh:
                fh.write("time_s,cwnd_pkts\n")
                for t, w in series:
                    fh.write("%.3f,%.6f\n" % (t, w))
        with open(os.path.join(outdir, "queue.csv"), "w") as fh:
            fh.write("time_s,backlog_pkts\n")
            for t, depth in result.queue_samples:
                fh.write("%.6f,%d\n" % (t, depth))
    return 0


def cmd_sweep(args):
    with open(args.spec) as fh:
        spec = harness.load_sweep(fh.read())
    points = harness.run_sweep(spec, scenario_prefix=os.path.basename(args.spec))
    _emit(harness.sweep_csv(points), args.out, "sweep.csv")
    return 0


def cmd_experiment(args):
    spec = harness.expand_experiment(args.id, protocol=args.protocol)
    prefix = args.id if args.protocol is None else "%s-%s" % (args.id, args.protocol)
    points = harness.run_sweep(spec, scenario_prefix=prefix)
    outdir = args.out or "out"
    written = harness.emit_plot_data(points, prefix, outdir)
    sys.stdout.write("\n".join(written) + "\n")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        return cmd_experiment(args)
    except (harness.ConfigError, OSError) as exc:
        sys.stderr.write("lbesim: %s\n" % exc)
        return 2
    except Exception as exc:
        sys.stderr.write("lbesim: internal error: %r\n" % exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
