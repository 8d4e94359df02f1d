"""uncoordsim: discrete-event simulator of uncoordinated serverless dispatching.

IoT clients send lambda invocations to a pool of edge executors chosen by
round-trip-delay estimates; estimates are refreshed by probabilistically
probing secondary executors with full duplicate invocations.  The simulator
reproduces the probing-rate and pool-size trade-offs of that scheme and
ships random / round-robin / least-queue oracle baselines.
"""

from .backend import compiled_available, resolve_backend, run_raw
from .engine import build_world, report_from_raw, run_pure
from .errors import ScenarioError, SimulationBug
from .metrics import MetricsReport, empirical_cdf, quantile_nearest_rank
from .runner import SweepSpec, run_simulation, sweep, write_csv
from .scenario import (Scenario, assign_pool, latency, load_scenario,
                       shipped_scenario_path, validate_scenario)

__version__ = "0.1.0"

__all__ = [
    "MetricsReport",
    "Scenario",
    "ScenarioError",
    "SimulationBug",
    "SweepSpec",
    "assign_pool",
    "build_world",
    "compiled_available",
    "empirical_cdf",
    "latency",
    "load_scenario",
    "quantile_nearest_rank",
    "report_from_raw",
    "resolve_backend",
    "run_pure",
    "run_raw",
    "run_simulation",
    "shipped_scenario_path",
    "sweep",
    "validate_scenario",
    "write_csv",
    "__version__",
]
