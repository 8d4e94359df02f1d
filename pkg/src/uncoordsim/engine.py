"""Simulation engine: shared world preparation and the pure-Python event loop.

build_world() flattens a validated Scenario into the plain numbers both
engines consume (pools, per-pair latencies, initial estimates, RNG substream
states), so the compiled kernel and this reference loop see bit-identical
inputs.  The event choreography is fixed here and mirrored exactly by the
kernel; any divergence is caught by the parity test suite:

  arrival:   sample ops -> schedule next arrival -> plan dispatch ->
             schedule primary copy, then probe copies in pool order
             (each copy is delivered one one-way latency later)
  delivery:  start service if the executor is idle, else join its FIFO
  service end: account busy time -> start next queued copy -> schedule the
             response one one-way latency later
  response:  refresh the estimate; the first response of a request records
             its delay sample and the traffic of all its copies
"""

from dataclasses import dataclass

from . import events, executors, metrics, policy, rng, workload
from .scenario import assign_pool, latency


@dataclass
class World:
    """Scenario flattened to plain per-index numbers (immutable by convention)."""

    n_executors: int
    n_clients: int
    k: int
    speeds: list
    pools: list            # per client: executor ids, nearest first
    lat: list              # per client: one-way propagation per pool slot
    lat_req: list          # propagation + request serialization
    lat_resp: list         # propagation + response serialization
    est0: list             # initial RTT estimates per pool slot
    arrival_kinds: list    # 0 deterministic, 1 poisson
    arrival_params: list   # period, or mean interarrival 1/rate
    ops_kinds: list        # 0 constant, 1 exponential
    ops_params: list       # mean operations
    in_bytes: list
    out_bytes: list
    policy_kind: str
    chi: float
    alpha: float
    horizon: float
    warmup: float
    rng_states: list       # per client: (arrival, ops, policy) xoshiro states


def build_world(scenario, seed):
    speeds = [e.speed for e in scenario.executors]
    k = scenario.policy.k
    pools, lat, lat_req, lat_resp, est0 = [], [], [], [], []
    arrival_kinds, arrival_params, ops_kinds, ops_params = [], [], [], []
    in_bytes, out_bytes, states = [], [], []
    link_rate = scenario.network.link_rate
    for client in scenario.clients:
        pool = assign_pool(client, k, scenario.executors, scenario.network)
        one_way = [latency(client, scenario.executors[e], scenario.network) for e in pool]
        wl = client.workload
        req_extra = wl.input_bytes / link_rate if link_rate else 0.0
        resp_extra = wl.output_bytes / link_rate if link_rate else 0.0
        pools.append(pool)
        lat.append(one_way)
        lat_req.append([l + req_extra for l in one_way])
        lat_resp.append([l + resp_extra for l in one_way])
        est0.append(policy.init_estimates(pool, one_way))
        arrival_kinds.append(0 if wl.arrival.kind == "deterministic" else 1)
        arrival_params.append(wl.arrival.mean_interarrival)
        ops_kinds.append(0 if wl.ops.kind == "constant" else 1)
        ops_params.append(wl.ops.mean)
        in_bytes.append(wl.input_bytes)
        out_bytes.append(wl.output_bytes)
        states.append(tuple(
            rng.substream_state(seed, rng.client_stream_id(client.id, which))
            for which in (rng.STREAM_ARRIVAL, rng.STREAM_OPS, rng.STREAM_POLICY)))
    return World(
        n_executors=len(speeds),
        n_clients=len(scenario.clients),
        k=k,
        speeds=speeds,
        pools=pools,
        lat=lat,
        lat_req=lat_req,
        lat_resp=lat_resp,
        est0=est0,
        arrival_kinds=arrival_kinds,
        arrival_params=arrival_params,
        ops_kinds=ops_kinds,
        ops_params=ops_params,
        in_bytes=in_bytes,
        out_bytes=out_bytes,
        policy_kind=scenario.policy.kind,
        chi=scenario.policy.chi,
        alpha=scenario.policy.alpha,
        horizon=scenario.horizon_s,
        warmup=scenario.warmup_s,
        rng_states=states,
    )


@dataclass
class RawResult:
    """Engine output before summarization; identical across backends."""

    delay_samples: list
    traffic_bytes: int
    busy_measured: list
    busy_total: list
    served_count: list
    served_ops: list
    requests_sent: list     # per client
    probes_sent: list       # per client
    created: list           # per client
    requests_completed: int  # got their first response
    requests_fully_responded: int
    pending_counts: dict     # events still queued at the horizon, by kind
    queue_lens: list         # per executor, at the horizon
    in_service: list         # per executor, 0/1 at the horizon
    final_estimates: list    # per client per pool slot


def report_from_raw(raw, world):
    collector = metrics.MetricsCollector(world.warmup)
    collector.delay_samples = list(raw.delay_samples)
    collector.traffic_bytes = int(raw.traffic_bytes)
    interval = world.horizon - world.warmup
    utilizations = [b / interval for b in raw.busy_measured]
    return metrics.finalize(
        collector, interval, utilizations,
        requests_sent=sum(raw.requests_sent),
        probes_sent=sum(raw.probes_sent),
        requests_created=sum(raw.created),
        requests_completed=raw.requests_completed,
    )


class _ClientRuntime:
    __slots__ = ("spec", "state", "arrival_stream", "ops_stream", "policy_stream",
                 "lat_req", "lat_resp", "created", "inflight")

    def __init__(self, spec, world):
        c = spec.id
        self.spec = spec
        self.state = policy.ClientPolicyState(
            client_id=c, kind=world.policy_kind, pool=world.pools[c],
            estimates=world.est0[c], alpha=world.alpha, chi=world.chi)
        arr, ops, pol = world.rng_states[c]
        self.arrival_stream = rng.Stream(arr)
        self.ops_stream = rng.Stream(ops)
        self.policy_stream = rng.Stream(pol)
        self.lat_req = world.lat_req[c]
        self.lat_resp = world.lat_resp[c]
        self.created = 0
        self.inflight = {}  # request id -> [copies, responded, delay_recorded]


class PySimulation:
    """Reference single-threaded event loop over the module-level models."""

    def __init__(self, scenario, seed, world=None, trace=None):
        self.scenario = scenario
        self.world = world if world is not None else build_world(scenario, seed)
        self.queue = events.EventQueue()
        if trace is not None:
            self.queue.observer = lambda ev: trace.write(ev.trace_line() + "\n")
        self.executors = [executors.ExecutorState(e.id, e.speed)
                          for e in scenario.executors]
        self.clients = [_ClientRuntime(c, self.world) for c in scenario.clients]
        self.collector = metrics.MetricsCollector(self.world.warmup)
        self.requests = {}
        self.next_request_id = 0
        self.requests_completed = 0
        self.requests_fully_responded = 0
        self._handlers = {
            events.ARRIVAL: self._on_arrival,
            events.REQUEST_SENT: self._on_request_sent,
            events.SERVICE_END: self._on_service_end,
            events.RESPONSE_RECEIVED: self._on_response,
        }
        for rt in self.clients:
            t0 = workload.first_arrival(rt.spec.workload.arrival, rt.arrival_stream)
            self.queue.schedule(t0, events.ARRIVAL, client=rt.spec.id)

    def run_until(self, t_end):
        """Process every pending event with time <= t_end, in (time, seq) order."""
        q = self.queue
        handlers = self._handlers
        while True:
            t = q.peek_time()
            if t is None or t > t_end:
                break
            ev = q.pop_next()
            handlers[ev.kind](ev)
        if t_end > q.clock:
            q.clock = t_end
        return self

    def run(self):
        """Run to the horizon and collect the raw results."""
        world = self.world
        self.run_until(world.horizon)
        for ex in self.executors:
            ex.flush_busy(world.horizon, world.warmup)
        return RawResult(
            delay_samples=self.collector.delay_samples,
            traffic_bytes=self.collector.traffic_bytes,
            busy_measured=[ex.busy_time_measured for ex in self.executors],
            busy_total=[ex.busy_time_accum for ex in self.executors],
            served_count=[ex.served_count for ex in self.executors],
            served_ops=[ex.served_ops for ex in self.executors],
            requests_sent=[rt.state.requests_sent for rt in self.clients],
            probes_sent=[rt.state.probes_sent for rt in self.clients],
            created=[rt.created for rt in self.clients],
            requests_completed=self.requests_completed,
            requests_fully_responded=self.requests_fully_responded,
            pending_counts=self.queue.pending_counts(),
            queue_lens=[len(ex.queue) for ex in self.executors],
            in_service=[int(ex.current is not None) for ex in self.executors],
            final_estimates=[list(rt.state.estimates) for rt in self.clients],
        )

    # -- handlers (order of draws and schedules is the backend contract) ------

    def _on_arrival(self, ev):
        t = ev.time
        rt = self.clients[ev.client]
        rid = self.next_request_id
        self.next_request_id += 1
        request = workload.sample_request(rt.spec.workload, ev.client, rid, t,
                                          rt.ops_stream)
        self.requests[rid] = request
        rt.created += 1
        gap = workload.next_interarrival(rt.spec.workload.arrival, rt.arrival_stream)
        self.queue.schedule(t + gap, events.ARRIVAL, client=ev.client)
        if rt.state.kind == policy.LEAST_QUEUE_ORACLE:
            loads = [ex.in_system for ex in self.executors]
        else:
            loads = None
        primary, probes = policy.plan_dispatch(rt.state, rt.policy_stream, loads)
        rt.inflight[rid] = [1 + len(probes), 0, False]
        pool = rt.state.pool
        self.queue.schedule(t + rt.lat_req[primary], events.REQUEST_SENT,
                            client=ev.client, request=rid, executor=pool[primary])
        for slot in probes:
            self.queue.schedule(t + rt.lat_req[slot], events.REQUEST_SENT,
                                client=ev.client, request=rid, executor=pool[slot],
                                is_probe=True)

    def _on_request_sent(self, ev):
        request = self.requests[ev.request]
        self.executors[ev.executor].enqueue_request(request, ev.is_probe, ev.time,
                                                    self.queue)

    def _on_service_end(self, ev):
        ex = self.executors[ev.executor]
        request, is_probe = ex.complete_request(ev.time, self.world.warmup, self.queue)
        rt = self.clients[request.client]
        slot = rt.state.slot_of(ev.executor)
        self.queue.schedule(ev.time + rt.lat_resp[slot], events.RESPONSE_RECEIVED,
                            client=request.client, request=request.id,
                            executor=ev.executor, is_probe=is_probe)

    def _on_response(self, ev):
        request = self.requests[ev.request]
        rt = self.clients[ev.client]
        measured = ev.time - request.created_at
        policy.on_response(rt.state, ev.executor, measured)
        record = rt.inflight[ev.request]
        record[1] += 1
        if not record[2]:
            record[2] = True
            self.requests_completed += 1
            self.collector.record_completion(measured, record[0], request.input_bytes,
                                             request.output_bytes, ev.time)
        if record[1] == record[0]:
            self.requests_fully_responded += 1
            del rt.inflight[ev.request]
            del self.requests[ev.request]


def run_pure(scenario, seed, world=None, trace=None):
    """One full run on the pure-Python engine."""
    return PySimulation(scenario, seed, world=world, trace=trace).run()
