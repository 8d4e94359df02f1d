"""Client-side dispatch policies.

The uncoordinated policy keeps a per-executor round-trip delay estimate,
sends every request to the current best estimate (the primary) and, with
probability chi per secondary, an identical probe copy to secondaries.
Probes are full executions: their cost IS the exploration overhead.
Responses refresh estimates through an exponentially weighted moving
average; the delay a client experiences is the first response per request.

random / round_robin / least_queue_oracle are probe-free baselines.
"""

from .errors import SimulationBug

UNCOORDINATED = "uncoordinated"
RANDOM = "random"
ROUND_ROBIN = "round_robin"
LEAST_QUEUE_ORACLE = "least_queue_oracle"


class ClientPolicyState:
    """Pool, delay estimates, and dispatch counters for one client."""

    __slots__ = ("client_id", "kind", "pool", "estimates", "alpha", "chi",
                 "probes_sent", "requests_sent", "rr_next")

    def __init__(self, client_id, kind, pool, estimates, alpha, chi):
        self.client_id = client_id
        self.kind = kind
        self.pool = list(pool)              # executor ids, nearest first
        self.estimates = list(estimates)    # aligned with pool, seconds RTT
        self.alpha = alpha
        self.chi = chi
        self.probes_sent = 0
        self.requests_sent = 0
        self.rr_next = 0                    # round_robin cursor

    def slot_of(self, executor_id):
        try:
            return self.pool.index(executor_id)
        except ValueError:
            return -1


def init_estimates(pool, one_way_latencies):
    """Zero-load starting estimates: the bare network round trip per member."""
    return [2.0 * one_way_latencies[i] for i in range(len(pool))]


def select_primary(pool, estimates):
    """Pool slot with the lowest estimate; ties go to the lower executor id."""
    if not pool:
        raise SimulationBug("select_primary: empty estimate table")
    best = 0
    for i in range(1, len(pool)):
        if estimates[i] < estimates[best] or (
                estimates[i] == estimates[best] and pool[i] < pool[best]):
            best = i
    return best


def draw_probe_set(pool, primary_slot, chi, stream):
    """Pool slots to probe: each secondary independently with probability chi.

    One uniform is consumed per secondary regardless of chi, so runs that
    differ only in chi share draws: a larger chi always yields a superset
    (u <= chi is inverse-transform inclusion, exact at chi = 0 and 1).
    """
    probes = []
    for i in range(len(pool)):
        if i == primary_slot:
            continue
        if stream.next_double() <= chi:
            probes.append(i)
    return probes


def ewma_update(estimate, sample, alpha):
    """Exponentially weighted moving average step."""
    return (1.0 - alpha) * estimate + alpha * sample


def baseline_select(state, stream, in_system_counts):
    """Destination slot for the probe-free baseline policies.

    random: uniform over the pool.  round_robin: cycle the pool in order.
    least_queue_oracle: the pool member currently holding the fewest
    requests (queued + in service), observed instantaneously and
    omnisciently; ties go to the lower executor id.
    """
    if state.kind == RANDOM:
        return stream.uniform_index(len(state.pool))
    if state.kind == ROUND_ROBIN:
        slot = state.rr_next
        state.rr_next = (state.rr_next + 1) % len(state.pool)
        return slot
    if state.kind == LEAST_QUEUE_ORACLE:
        best = 0
        best_load = in_system_counts[state.pool[0]]
        for i in range(1, len(state.pool)):
            load = in_system_counts[state.pool[i]]
            if load < best_load or (load == best_load and state.pool[i] < state.pool[best]):
                best = i
                best_load = load
        return best
    raise ValueError(f"unknown baseline policy: {state.kind}")


def plan_dispatch(state, stream, in_system_counts=None):
    """Choose destinations for one request: (primary_slot, probe_slots).

    Updates the dispatch counters; actual event scheduling is the engine's
    job.  Baselines never probe.
    """
    if state.kind == UNCOORDINATED:
        primary = select_primary(state.pool, state.estimates)
        probes = draw_probe_set(state.pool, primary, state.chi, stream)
    else:
        primary = baseline_select(state, stream, in_system_counts)
        probes = []
    state.requests_sent += 1
    state.probes_sent += len(probes)
    return primary, probes


def on_response(state, executor_id, measured_delay):
    """Refresh the executor's delay estimate from one observed round trip.

    Estimate bookkeeping only: first-response delay recording is handled by
    the metrics collector, which sees every response exactly once.
    """
    slot = state.slot_of(executor_id)
    if slot < 0:
        raise SimulationBug(
            f"client {state.client_id}: response from executor {executor_id} outside pool")
    if state.kind == UNCOORDINATED:
        state.estimates[slot] = ewma_update(state.estimates[slot], measured_delay, state.alpha)
