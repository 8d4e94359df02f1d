"""World description: executors, clients, network, workload, policy.

A scenario is loaded from a JSON document and validated once; after
validation it is immutable and can be shared freely across simulation
instances.  Scenario file layout (all keys mandatory unless noted)::

    {
      "executors": [{"id": 0, "speed": 1e9, "position": [0.0, 0.0]}, ...],
      "clients": [
        {"id": 0, "position": [1.0, 2.0],
         "workload": {
            "arrival": {"kind": "poisson", "rate": 80.0},        # or {"kind": "deterministic", "period": 0.01}
            "ops": {"kind": "exponential", "mean": 1e7},         # or {"kind": "constant", "mean": 2e6}
            "input_bytes": 1000, "output_bytes": 200}},
        ...],
      "network": {"base_latency": 0.001, "latency_per_unit_distance": 0.0001,
                  "link_rate": null},                            # optional; null/omitted = pure delay
      "policy": {"kind": "uncoordinated", "k": 3, "chi": 0.1, "alpha": 0.1},
      "horizon_s": 60.0,
      "warmup_s": 10.0
    }

Unknown keys are rejected at every level.
"""

import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Optional

from .errors import ScenarioError

POLICY_KINDS = ("uncoordinated", "random", "round_robin", "least_queue_oracle")
ARRIVAL_KINDS = ("deterministic", "poisson")
OPS_KINDS = ("constant", "exponential")


@dataclass(frozen=True)
class ArrivalSpec:
    kind: str                      # "deterministic" | "poisson"
    period: Optional[float] = None  # seconds, deterministic only
    rate: Optional[float] = None    # requests/second, poisson only

    @property
    def mean_interarrival(self):
        return self.period if self.kind == "deterministic" else 1.0 / self.rate


@dataclass(frozen=True)
class OpsSpec:
    kind: str    # "constant" | "exponential"
    mean: float  # operations per request


@dataclass(frozen=True)
class WorkloadSpec:
    arrival: ArrivalSpec
    ops: OpsSpec
    input_bytes: int
    output_bytes: int


@dataclass(frozen=True)
class ExecutorSpec:
    id: int
    speed: float                    # operations per second
    position: tuple                 # (x, y) in abstract distance units


@dataclass(frozen=True)
class ClientSpec:
    id: int
    position: tuple
    workload: WorkloadSpec


@dataclass(frozen=True)
class NetworkSpec:
    base_latency: float                  # seconds, one-way
    latency_per_unit_distance: float     # seconds per distance unit
    link_rate: Optional[float] = None    # bytes/second; None = pure delay (default)


@dataclass(frozen=True)
class PolicyConfig:
    kind: str
    k: int = 1
    chi: float = 0.0
    alpha: float = 0.1


@dataclass(frozen=True)
class Scenario:
    executors: tuple
    clients: tuple
    network: NetworkSpec
    policy: PolicyConfig
    horizon_s: float
    warmup_s: float

    def replace_policy(self, **changes):
        """New Scenario with policy fields changed (used by parameter sweeps)."""
        new_policy = PolicyConfig(
            kind=changes.get("kind", self.policy.kind),
            k=changes.get("k", self.policy.k),
            chi=changes.get("chi", self.policy.chi),
            alpha=changes.get("alpha", self.policy.alpha),
        )
        return Scenario(self.executors, self.clients, self.network, new_policy,
                        self.horizon_s, self.warmup_s)


def latency(client, executor, net):
    """One-way network latency between a client and an executor, in seconds.

    base_latency + latency_per_unit_distance * euclidean distance; the same
    value applies in both directions.
    """
    dx = client.position[0] - executor.position[0]
    dy = client.position[1] - executor.position[1]
    return net.base_latency + net.latency_per_unit_distance * math.sqrt(dx * dx + dy * dy)


def assign_pool(client, k, executors, net):
    """The k executors closest to the client, ascending by latency.

    Ties break toward the lower executor id, so pools are stable and
    assign_pool(k1) is a prefix of assign_pool(k2) for k1 < k2.
    """
    ranked = sorted(executors, key=lambda e: (latency(client, e, net), e.id))
    return [e.id for e in ranked[:k]]


# -- validation ---------------------------------------------------------------

def _require_keys(obj, allowed, required, path):
    if not isinstance(obj, dict):
        raise ScenarioError(f"{path}: expected an object")
    for key in obj:
        if key not in allowed:
            raise ScenarioError(f"{path}.{key}: unknown key")
    for key in required:
        if key not in obj:
            raise ScenarioError(f"{path}.{key}: missing")


def _number(obj, key, path, *, minimum=None, exclusive_min=None, maximum=None):
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ScenarioError(f"{path}.{key}: expected a finite number")
    v = float(v)
    if minimum is not None and v < minimum:
        raise ScenarioError(f"{path}.{key}: must be >= {minimum}")
    if exclusive_min is not None and v <= exclusive_min:
        raise ScenarioError(f"{path}.{key}: must be > {exclusive_min}")
    if maximum is not None and v > maximum:
        raise ScenarioError(f"{path}.{key}: must be <= {maximum}")
    return v


def _nonneg_int(obj, key, path):
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise ScenarioError(f"{path}.{key}: expected a nonnegative integer")
    return v


def _position(obj, path):
    v = obj["position"]
    if (not isinstance(v, (list, tuple)) or len(v) != 2
            or any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in v)):
        raise ScenarioError(f"{path}.position: expected [x, y]")
    return (float(v[0]), float(v[1]))


def _check_ids(items, path):
    ids = [it["id"] for it in items]
    if sorted(ids) != list(range(len(items))):
        raise ScenarioError(f"{path}: ids must be unique and contiguous from 0")


def _parse_arrival(raw, path):
    _require_keys(raw, {"kind", "period", "rate"}, {"kind"}, path)
    kind = raw.get("kind")
    if kind not in ARRIVAL_KINDS:
        raise ScenarioError(f"{path}.kind: expected one of {ARRIVAL_KINDS}")
    if kind == "deterministic":
        _require_keys(raw, {"kind", "period"}, {"kind", "period"}, path)
        return ArrivalSpec(kind="deterministic",
                           period=_number(raw, "period", path, exclusive_min=0.0))
    _require_keys(raw, {"kind", "rate"}, {"kind", "rate"}, path)
    return ArrivalSpec(kind="poisson", rate=_number(raw, "rate", path, exclusive_min=0.0))


def _parse_ops(raw, path):
    _require_keys(raw, {"kind", "mean"}, {"kind", "mean"}, path)
    if raw["kind"] not in OPS_KINDS:
        raise ScenarioError(f"{path}.kind: expected one of {OPS_KINDS}")
    return OpsSpec(kind=raw["kind"], mean=_number(raw, "mean", path, exclusive_min=0.0))


def _parse_workload(raw, path):
    _require_keys(raw, {"arrival", "ops", "input_bytes", "output_bytes"},
                  {"arrival", "ops", "input_bytes", "output_bytes"}, path)
    return WorkloadSpec(
        arrival=_parse_arrival(raw["arrival"], f"{path}.arrival"),
        ops=_parse_ops(raw["ops"], f"{path}.ops"),
        input_bytes=_nonneg_int(raw, "input_bytes", path),
        output_bytes=_nonneg_int(raw, "output_bytes", path),
    )


def validate_scenario(raw):
    """Validate a parsed scenario description and return an immutable Scenario.

    Raises ScenarioError naming the first violated invariant with its field
    path (e.g. "policy.k: pool_size exceeds executor count").
    """
    _require_keys(raw, {"executors", "clients", "network", "policy", "horizon_s", "warmup_s"},
                  {"executors", "clients", "network", "policy", "horizon_s", "warmup_s"}, "scenario")

    raw_execs = raw["executors"]
    if not isinstance(raw_execs, list) or not raw_execs:
        raise ScenarioError("executors: must be a nonempty list")
    for i, e in enumerate(raw_execs):
        _require_keys(e, {"id", "speed", "position"}, {"id", "speed", "position"},
                      f"executors[{i}]")
    _check_ids(raw_execs, "executors")
    executors = tuple(sorted(
        (ExecutorSpec(id=e["id"],
                      speed=_number(e, "speed", f"executors[{i}]", exclusive_min=0.0),
                      position=_position(e, f"executors[{i}]"))
         for i, e in enumerate(raw_execs)),
        key=lambda e: e.id))

    raw_clients = raw["clients"]
    if not isinstance(raw_clients, list) or not raw_clients:
        raise ScenarioError("clients: must be a nonempty list")
    for i, c in enumerate(raw_clients):
        _require_keys(c, {"id", "position", "workload"}, {"id", "position", "workload"},
                      f"clients[{i}]")
    _check_ids(raw_clients, "clients")
    clients = tuple(sorted(
        (ClientSpec(id=c["id"],
                    position=_position(c, f"clients[{i}]"),
                    workload=_parse_workload(c["workload"], f"clients[{i}].workload"))
         for i, c in enumerate(raw_clients)),
        key=lambda c: c.id))

    raw_net = raw["network"]
    _require_keys(raw_net, {"base_latency", "latency_per_unit_distance", "link_rate"},
                  {"base_latency", "latency_per_unit_distance"}, "network")
    link_rate = None
    if raw_net.get("link_rate") is not None:
        link_rate = _number(raw_net, "link_rate", "network", exclusive_min=0.0)
    network = NetworkSpec(
        base_latency=_number(raw_net, "base_latency", "network", minimum=0.0),
        latency_per_unit_distance=_number(raw_net, "latency_per_unit_distance",
                                          "network", minimum=0.0),
        link_rate=link_rate,
    )

    raw_policy = raw["policy"]
    _require_keys(raw_policy, {"kind", "k", "chi", "alpha"}, {"kind"}, "policy")
    kind = raw_policy["kind"]
    if kind not in POLICY_KINDS:
        raise ScenarioError(f"policy.kind: expected one of {POLICY_KINDS}")
    k = raw_policy.get("k", 1)
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise ScenarioError("policy.k: expected an integer >= 1")
    if k > len(executors):
        raise ScenarioError("policy.k: pool_size exceeds executor count")
    chi = float(_number(raw_policy, "chi", "policy")) if "chi" in raw_policy else 0.0
    if not 0.0 <= chi <= 1.0:
        raise ScenarioError("policy.chi: chi outside [0,1]")
    alpha = float(_number(raw_policy, "alpha", "policy")) if "alpha" in raw_policy else 0.1
    if not 0.0 < alpha <= 1.0:
        raise ScenarioError("policy.alpha: alpha outside (0,1]")
    policy = PolicyConfig(kind=kind, k=k, chi=chi, alpha=alpha)

    horizon = _number(raw, "horizon_s", "scenario", exclusive_min=0.0)
    warmup = _number(raw, "warmup_s", "scenario", minimum=0.0)
    if warmup >= horizon:
        raise ScenarioError("warmup_s: must be < horizon_s")

    return Scenario(executors=executors, clients=clients, network=network,
                    policy=policy, horizon_s=horizon, warmup_s=warmup)


def load_scenario(path):
    """Load and validate a scenario JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: not valid JSON ({exc})") from exc
    return validate_scenario(raw)


def shipped_scenario_path(name):
    """Filesystem path of a scenario shipped with the package.

    Available names: "chi-study", "poolsize-study".
    """
    return str(resources.files(__package__).joinpath(f"scenarios/{name}.json"))
