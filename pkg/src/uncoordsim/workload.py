"""Request generation: arrival processes and per-request attributes."""

from dataclasses import dataclass


@dataclass(slots=True)
class Request:
    id: int
    client: int
    created_at: float
    ops: float
    input_bytes: int
    output_bytes: int


def next_interarrival(arrival, stream):
    """Time to the next request: the fixed period, or an exponential draw.

    Poisson interarrivals use mean 1/rate via inverse transform so the
    sequence is reproducible to the bit for a given stream state.
    """
    if arrival.kind == "deterministic":
        return arrival.period
    return stream.exponential(1.0 / arrival.rate)


def first_arrival(arrival, stream):
    """Deterministic clients start at t=0; Poisson ones at one sampled gap.

    Sampling the first Poisson arrival avoids every client firing at t=0
    in lockstep while keeping deterministic traces trivially auditable.
    """
    if arrival.kind == "deterministic":
        return 0.0
    return stream.exponential(1.0 / arrival.rate)


def sample_ops(ops, stream):
    if ops.kind == "constant":
        return ops.mean
    return stream.exponential(ops.mean)


def sample_request(workload, client_id, request_id, now, stream):
    """Draw one request for a client; sizes are copied verbatim from the spec."""
    return Request(
        id=request_id,
        client=client_id,
        created_at=now,
        ops=sample_ops(workload.ops, stream),
        input_bytes=workload.input_bytes,
        output_bytes=workload.output_bytes,
    )
