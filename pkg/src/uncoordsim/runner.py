"""Run orchestration: single seeded runs, parameter sweeps, CSV output.

Sweeps vary chi or the pool size k over a value grid and a seed list; every
(value, seed) pair is an isolated simulation instance, so replications may
run in parallel worker processes, but rows are always assembled in (value,
seed) order and the output files are byte-identical however many workers
ran.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import metrics
from .backend import run_raw
from .engine import build_world, report_from_raw
from .errors import ScenarioError

SWEEP_PARAMS = ("chi", "k")
CSV_HEADER = "param,value,seed,delay_mean_s,delay_p95_s,traffic_rate_Bps,util_mean,probes_per_request"


def run_simulation(scenario, seed, backend=None, trace=None):
    """One full simulation: returns the finalized MetricsReport."""
    world = build_world(scenario, seed)
    raw = run_raw(scenario, seed, backend=backend, world=world, trace=trace)
    return report_from_raw(raw, world)


@dataclass(frozen=True)
class SweepSpec:
    parameter: str   # "chi" | "k"
    values: tuple
    seeds: tuple


def validate_sweep(scenario, spec):
    """Check every sweep point against the scenario before any run starts."""
    if spec.parameter not in SWEEP_PARAMS:
        raise ScenarioError(f"sweep.param: expected one of {SWEEP_PARAMS}")
    if not spec.values:
        raise ScenarioError("sweep.values: must be nonempty")
    if not spec.seeds:
        raise ScenarioError("sweep.seeds: must be nonempty")
    for v in spec.values:
        if spec.parameter == "chi":
            if not 0.0 <= v <= 1.0:
                raise ScenarioError(f"sweep.values: chi outside [0,1]: {v}")
        else:
            if v != int(v) or v < 1:
                raise ScenarioError(f"sweep.values: k must be an integer >= 1: {v}")
            if v > len(scenario.executors):
                raise ScenarioError(
                    f"sweep.values: pool_size exceeds executor count: {int(v)}")


def scenario_at(scenario, parameter, value):
    if parameter == "chi":
        return scenario.replace_policy(chi=float(value))
    return scenario.replace_policy(k=int(value))


def _run_point(args):
    scenario, parameter, value, seed, backend = args
    report = run_simulation(scenario_at(scenario, parameter, value), seed,
                            backend=backend)
    return (value, seed, report)


def sweep(scenario, spec, backend=None, jobs=1):
    """Run the full (value, seed) grid; returns rows ordered by (value, seed).

    Each row is (value, seed, MetricsReport).
    """
    validate_sweep(scenario, spec)
    tasks = [(scenario, spec.parameter, value, seed, backend)
             for value in spec.values for seed in spec.seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_point, tasks))
    else:
        results = [_run_point(t) for t in tasks]
    results.sort(key=lambda row: (row[0], row[1]))
    return results


def _fmt(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return f"{x:.9g}"


def _fmt_value(parameter, value):
    return str(int(value)) if parameter == "k" else f"{value:g}"


def write_csv(rows, parameter, path):
    """Summary CSV, one row per (value, seed); deterministic bytes."""
    if not rows:
        raise ScenarioError("sweep produced no rows; nothing to write")
    lines = [CSV_HEADER]
    for value, seed, report in rows:
        lines.append(",".join([
            parameter,
            _fmt_value(parameter, value),
            str(seed),
            _fmt(report.delay_mean),
            _fmt(report.delay_p95),
            _fmt(report.traffic_rate),
            _fmt(report.utilization_mean),
            _fmt(report.probes_per_request),
        ]))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def cdf_filename(policy_kind, parameter, value, seed):
    return f"cdf_{policy_kind}_{parameter}={_fmt_value(parameter, value)}_seed={seed}.csv"


def write_sweep_outputs(scenario, spec, rows, out_dir):
    """Write the summary CSV plus one delay-CDF file per sweep point."""
    os.makedirs(out_dir, exist_ok=True)
    write_csv(rows, spec.parameter, os.path.join(out_dir, f"sweep_{spec.parameter}.csv"))
    for value, seed, report in rows:
        name = cdf_filename(scenario.policy.kind, spec.parameter, value, seed)
        metrics.write_cdf_csv(report.delay_samples, os.path.join(out_dir, name))
