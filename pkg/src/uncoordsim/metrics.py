"""Delay, traffic and utilization statistics.

Quantiles use the nearest-rank rule (no interpolation): sort ascending and
take the element at 1-indexed rank ceil(p*n).  Exact, reproducible, and
unambiguous for the 95th percentile.
"""

import math
from dataclasses import dataclass
from typing import Optional


def quantile_nearest_rank(samples, p):
    """Nearest-rank quantile; None when there is no data.

    The small epsilon keeps ceil() from jumping a rank when p*n lands a
    float rounding error above an exact integer (e.g. 0.95 * 100).
    """
    if not 0.0 < p <= 1.0:
        raise ValueError(f"quantile order must be in (0,1], got {p}")
    n = len(samples)
    if n == 0:
        return None
    rank = math.ceil(p * n - 1e-9)
    if rank < 1:
        rank = 1
    return sorted(samples)[rank - 1]


def empirical_cdf(samples):
    """Step CDF as (value, cumulative fraction) at each distinct sample value.

    The final fraction is exactly 1.0; empty input gives an empty list.
    """
    n = len(samples)
    if n == 0:
        return []
    points = []
    seen = 0
    ordered = sorted(samples)
    for i, v in enumerate(ordered):
        seen += 1
        if i + 1 == n or ordered[i + 1] != v:
            points.append((v, seen / n))
    return points


@dataclass
class MetricsReport:
    """Finalized run summary over the post-warmup measurement interval."""

    delay_samples: list
    delay_mean: Optional[float]
    delay_p95: Optional[float]
    traffic_bytes: int
    traffic_rate: float            # bytes/second over the measured interval
    utilization_per_executor: list
    utilization_mean: float
    requests_sent: int             # dispatches over the whole run
    probes_sent: int
    requests_created: int
    requests_completed: int        # got at least one response
    interval_s: float

    @property
    def has_data(self):
        return bool(self.delay_samples)

    @property
    def probes_per_request(self):
        if self.requests_sent == 0:
            return float("nan")
        return self.probes_sent / self.requests_sent

    def cdf(self):
        return empirical_cdf(self.delay_samples)


class MetricsCollector:
    """Accumulates per-request completions during a run.

    Only the first response of a request is a completion; it contributes one
    delay sample and the traffic of every copy that was sent for it (each
    copy carries input_bytes out and output_bytes back, probes included).
    Completions before the warmup boundary are discarded.
    """

    __slots__ = ("warmup", "delay_samples", "traffic_bytes")

    def __init__(self, warmup):
        self.warmup = warmup
        self.delay_samples = []
        self.traffic_bytes = 0

    def record_completion(self, delay, copies_sent, bytes_in, bytes_out, now):
        if delay < 0:
            raise ValueError(f"negative delay sample: {delay!r}")
        if now < self.warmup:
            return
        self.delay_samples.append(delay)
        self.traffic_bytes += copies_sent * (bytes_in + bytes_out)


def finalize(collector, interval_s, utilizations, requests_sent, probes_sent,
             requests_created, requests_completed):
    """Build the summary report; a run with zero samples is marked no-data
    (mean/p95 are None) but every counter is still reported."""
    if interval_s <= 0:
        raise ValueError("measurement interval must be positive")
    samples = collector.delay_samples
    mean = math.fsum(samples) / len(samples) if samples else None
    p95 = quantile_nearest_rank(samples, 0.95)
    util_mean = math.fsum(utilizations) / len(utilizations)
    return MetricsReport(
        delay_samples=samples,
        delay_mean=mean,
        delay_p95=p95,
        traffic_bytes=collector.traffic_bytes,
        traffic_rate=collector.traffic_bytes / interval_s,
        utilization_per_executor=list(utilizations),
        utilization_mean=util_mean,
        requests_sent=requests_sent,
        probes_sent=probes_sent,
        requests_created=requests_created,
        requests_completed=requests_completed,
        interval_s=interval_s,
    )


def write_cdf_csv(samples, path):
    """Two-column CSV dump of the empirical delay CDF: delay_s,cum_prob."""
    points = empirical_cdf(samples)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("delay_s,cum_prob\n")
        for value, cum in points:
            fh.write(f"{value:.9g},{cum:.9g}\n")
