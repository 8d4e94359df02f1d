"""Deterministic discrete-event core: a clock plus a totally ordered event queue.

Events are ordered by (time, seq) where seq is a monotone insertion counter,
so runs are bit-exact reproducible: equal-time events pop in insertion order.
"""

import heapq
from dataclasses import dataclass

from .errors import SimulationBug

ARRIVAL = "arrival"
REQUEST_SENT = "request_sent"
SERVICE_START = "service_start"
SERVICE_END = "service_end"
RESPONSE_RECEIVED = "response_received"


@dataclass(slots=True)
class Event:
    time: float
    seq: int
    kind: str
    client: int = -1
    request: int = -1
    executor: int = -1
    is_probe: bool = False

    def trace_line(self):
        parts = []
        if self.client >= 0:
            parts.append(f"client={self.client}")
        if self.request >= 0:
            parts.append(f"request={self.request}")
        if self.executor >= 0:
            parts.append(f"executor={self.executor}")
        if self.kind in (REQUEST_SENT, RESPONSE_RECEIVED):
            parts.append(f"probe={int(self.is_probe)}")
        return f"{self.time:.9f}\t{self.seq}\t{self.kind}\t{' '.join(parts)}"


class EventQueue:
    """Pending-event queue with a nondecreasing clock.

    pop_next() returns events in (time, seq) order and advances the clock;
    scheduling behind the clock is a fatal internal error (a model bug, not
    a user error).
    """

    def __init__(self):
        self._heap = []
        self._seq = 0
        self.clock = 0.0
        self.observer = None  # called with every processed or emitted event (tracing)

    def __len__(self):
        return len(self._heap)

    def next_seq(self):
        """Consume one value from the insertion counter.

        Used for events that take effect immediately (service_start) and
        therefore never sit in the heap, so that (time, seq) stays unique
        across everything that appears in a trace.
        """
        s = self._seq
        self._seq += 1
        return s

    def schedule(self, time, kind, client=-1, request=-1, executor=-1, is_probe=False):
        if time < self.clock:
            raise SimulationBug(
                f"schedule in the past: {kind} at t={time!r} with clock={self.clock!r}")
        ev = Event(time, self.next_seq(), kind, client, request, executor, is_probe)
        heapq.heappush(self._heap, (time, ev.seq, ev))
        return ev

    def emit_now(self, kind, client=-1, request=-1, executor=-1, is_probe=False):
        """Record an event that takes effect immediately (no queueing delay).

        Service starts always coincide with the event that triggers them, so
        they are emitted rather than scheduled; they still consume a seq so
        traced runs and untraced runs order identically.
        """
        ev = Event(self.clock, self.next_seq(), kind, client, request, executor, is_probe)
        if self.observer is not None:
            self.observer(ev)
        return ev

    def peek_time(self):
        return self._heap[0][0] if self._heap else None

    def pop_next(self):
        """Pop the minimum-(time, seq) event, or None when drained."""
        if not self._heap:
            return None
        _, _, ev = heapq.heappop(self._heap)
        self.clock = ev.time
        if self.observer is not None:
            self.observer(ev)
        return ev

    def pending_counts(self):
        """Count of still-pending events by kind (end-of-run accounting)."""
        counts = {}
        for _, _, ev in self._heap:
            counts[ev.kind] = counts.get(ev.kind, 0) + 1
        return counts
