"""Engine backend selection: compiled extension with pure-Python fallback.

The compiled kernel and the pure engine produce bit-identical results (the
parity tests enforce it); "auto" simply picks the fast one when the
extension built.  Override with the UNCOORDSIM_BACKEND environment variable
or the --backend CLI flag.
"""

import os

import numpy as np

from .engine import RawResult, build_world, run_pure

BACKENDS = ("auto", "python", "compiled")

try:
    from . import _kernel
except ImportError:
    _kernel = None

_POLICY_CODES = {"uncoordinated": 0, "random": 1, "round_robin": 2, "least_queue_oracle": 3}


def compiled_available():
    return _kernel is not None


def default_backend():
    return os.environ.get("UNCOORDSIM_BACKEND", "auto")


def resolve_backend(requested=None):
    """Map a requested backend name to 'python' or 'compiled'."""
    name = requested if requested is not None else default_backend()
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}; expected one of {BACKENDS}")
    if name == "auto":
        return "compiled" if compiled_available() else "python"
    if name == "compiled" and not compiled_available():
        raise RuntimeError(
            "compiled backend requested but the uncoordsim._kernel extension is not "
            "built; reinstall the package or use --backend python")
    return name


def _world_arrays(world):
    C, E, K = world.n_clients, world.n_executors, world.k
    pool = np.asarray(world.pools, dtype=np.int64).reshape(C, K)
    pool_slot = np.full((C, E), -1, dtype=np.int64)
    for c in range(C):
        for slot, e in enumerate(world.pools[c]):
            pool_slot[c, e] = slot
    rng_states = np.asarray(world.rng_states, dtype=np.uint64).reshape(C, 3, 4)
    return {
        "speeds": np.asarray(world.speeds, dtype=np.float64),
        "pool": pool,
        "pool_slot": pool_slot,
        "lat_req": np.asarray(world.lat_req, dtype=np.float64).reshape(C, K),
        "lat_resp": np.asarray(world.lat_resp, dtype=np.float64).reshape(C, K),
        "est": np.asarray(world.est0, dtype=np.float64).reshape(C, K).copy(),
        "arrival_kind": np.asarray(world.arrival_kinds, dtype=np.uint8),
        "arrival_param": np.asarray(world.arrival_params, dtype=np.float64),
        "ops_kind": np.asarray(world.ops_kinds, dtype=np.uint8),
        "ops_param": np.asarray(world.ops_params, dtype=np.float64),
        "in_bytes": np.asarray(world.in_bytes, dtype=np.int64),
        "out_bytes": np.asarray(world.out_bytes, dtype=np.int64),
        "policy_kind": _POLICY_CODES[world.policy_kind],
        "chi": world.chi,
        "alpha": world.alpha,
        "horizon": world.horizon,
        "warmup": world.warmup,
        "rng_states": rng_states,
    }


def run_compiled(scenario, seed, world=None):
    """One full run on the compiled kernel; output layout matches run_pure."""
    if _kernel is None:
        raise RuntimeError("uncoordsim._kernel extension is not built")
    if world is None:
        world = build_world(scenario, seed)
    out = _kernel.run_kernel(**_world_arrays(world))
    return RawResult(
        delay_samples=out["delay_samples"].tolist(),
        traffic_bytes=int(out["traffic_bytes"]),
        busy_measured=out["busy_measured"].tolist(),
        busy_total=out["busy_total"].tolist(),
        served_count=out["served_count"].tolist(),
        served_ops=out["served_ops"].tolist(),
        requests_sent=out["requests_sent"].tolist(),
        probes_sent=out["probes_sent"].tolist(),
        created=out["created"].tolist(),
        requests_completed=int(out["requests_completed"]),
        requests_fully_responded=int(out["requests_fully_responded"]),
        pending_counts={k: int(v) for k, v in out["pending"].items() if v},
        queue_lens=out["queue_lens"].tolist(),
        in_service=out["in_service"].tolist(),
        final_estimates=out["final_estimates"].tolist(),
    )


def run_raw(scenario, seed, backend=None, world=None, trace=None):
    """Dispatch one run to the chosen backend.

    Event tracing is a pure-engine feature; under "auto" a traced run
    silently uses the pure engine (results are identical either way).
    """
    chosen = resolve_backend(backend)
    if trace is not None and chosen == "compiled":
        if backend == "compiled":
            raise ValueError("event tracing is only available on the python backend")
        chosen = "python"
    if chosen == "compiled":
        return run_compiled(scenario, seed, world=world)
    return run_pure(scenario, seed, world=world, trace=trace)
