"""Command-line interface.

    uncoordsim simulate --scenario world.json --seed 1 [--trace trace.tsv] [--cdf out.csv]
    uncoordsim sweep --scenario world.json --param chi --values 0.001,0.01,0.1,0.5 \
                     --seeds 1,2,3,4,5 --out results/

Exit codes: 0 success, 1 validation error, 2 I/O error.
"""

import argparse
import sys

from . import metrics
from .backend import BACKENDS, default_backend
from .errors import ScenarioError
from .runner import SweepSpec, run_simulation, sweep, write_sweep_outputs
from .scenario import load_scenario

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


def _add_common(parser):
    parser.add_argument("--scenario", required=True, help="scenario JSON file")
    parser.add_argument("--backend", choices=BACKENDS, default=default_backend(),
                        help="simulation engine (default: env UNCOORDSIM_BACKEND or auto)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="uncoordsim",
        description="Discrete-event simulator of uncoordinated serverless "
                    "dispatching at the network edge")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one seeded simulation")
    _add_common(p_sim)
    p_sim.add_argument("--seed", required=True, type=int, help="master RNG seed (u64)")
    p_sim.add_argument("--trace", help="write a tab-separated event trace to this file")
    p_sim.add_argument("--cdf", help="write the delay CDF (delay_s,cum_prob) to this file")

    p_sweep = sub.add_parser("sweep", help="sweep chi or pool size k over seeds")
    _add_common(p_sweep)
    p_sweep.add_argument("--param", required=True, choices=["chi", "k"])
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated parameter values")
    p_sweep.add_argument("--seeds", required=True,
                         help="comma-separated seed list")
    p_sweep.add_argument("--out", required=True, help="output directory")
    p_sweep.add_argument("--jobs", type=int, default=1,
                         help="worker processes for replications (default 1)")
    return parser


def _print_report(report):
    def fmt(x):
        return "no data" if x is None else f"{x:.9g}"

    print(f"requests_created:    {report.requests_created}")
    print(f"requests_completed:  {report.requests_completed}")
    print(f"delay_samples:       {len(report.delay_samples)}")
    print(f"delay_mean_s:        {fmt(report.delay_mean)}")
    print(f"delay_p95_s:         {fmt(report.delay_p95)}")
    print(f"traffic_bytes:       {report.traffic_bytes}")
    print(f"traffic_rate_Bps:    {fmt(report.traffic_rate)}")
    print(f"util_mean:           {fmt(report.utilization_mean)}")
    print(f"probes_per_request:  {report.probes_per_request:.9g}")


def _cmd_simulate(args):
    scenario = load_scenario(args.scenario)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as trace:
            report = run_simulation(scenario, args.seed, backend=args.backend,
                                    trace=trace)
    else:
        report = run_simulation(scenario, args.seed, backend=args.backend)
    _print_report(report)
    if args.cdf:
        metrics.write_cdf_csv(report.delay_samples, args.cdf)
    return EXIT_OK


def _parse_values(param, text):
    try:
        if param == "k":
            return tuple(int(v) for v in text.split(","))
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise ScenarioError(f"sweep.values: {exc}") from exc


def _parse_seeds(text):
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise ScenarioError(f"sweep.seeds: {exc}") from exc


def _cmd_sweep(args):
    scenario = load_scenario(args.scenario)
    spec = SweepSpec(parameter=args.param,
                     values=_parse_values(args.param, args.values),
                     seeds=_parse_seeds(args.seeds))
    rows = sweep(scenario, spec, backend=args.backend, jobs=args.jobs)
    write_sweep_outputs(scenario, spec, rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}/sweep_{spec.parameter}.csv")
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        return _cmd_sweep(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
