"""Executor model: one non-preemptive FIFO server per edge node.

Service time is ops/speed.  Probe copies are executed in full, exactly like
normal requests: that is what makes computational load grow with probing.
"""

from collections import deque

from . import events
from .errors import SimulationBug


def service_time(ops, speed):
    """Seconds to execute `ops` operations at `speed` operations/second."""
    return ops / speed


class ExecutorState:
    """FIFO queue plus busy-interval accounting for one executor.

    busy_time_accum sums completed service durations only, so that
    served_ops / speed == busy_time_accum holds exactly (up to float
    accumulation error).  busy_time_measured is the part of busy time that
    overlaps the measurement window, maintained separately for utilization.
    """

    __slots__ = ("id", "speed", "queue", "current", "busy_until",
                 "busy_time_accum", "busy_time_measured", "served_count", "served_ops")

    def __init__(self, executor_id, speed):
        self.id = executor_id
        self.speed = speed
        self.queue = deque()          # waiting (request, is_probe), arrival order
        self.current = None           # (request, is_probe, start_time, duration)
        self.busy_until = 0.0
        self.busy_time_accum = 0.0
        self.busy_time_measured = 0.0
        self.served_count = 0
        self.served_ops = 0.0

    @property
    def in_system(self):
        return len(self.queue) + (1 if self.current is not None else 0)

    def _start_service(self, request, is_probe, now, equeue):
        duration = service_time(request.ops, self.speed)
        end = now + duration
        self.current = (request, is_probe, now, duration)
        self.busy_until = end
        equeue.emit_now(events.SERVICE_START, request=request.id, executor=self.id)
        equeue.schedule(end, events.SERVICE_END, request=request.id, executor=self.id,
                        is_probe=is_probe)

    def enqueue_request(self, request, is_probe, now, equeue):
        """Accept a request copy: start service if idle, else join the FIFO."""
        if self.current is None:
            self._start_service(request, is_probe, now, equeue)
        else:
            self.queue.append((request, is_probe))

    def complete_request(self, now, warmup, equeue):
        """Finish the in-service request; pull the next one from the queue.

        Returns the finished (request, is_probe); the caller routes the
        response back to the client.
        """
        if self.current is None:
            raise SimulationBug(
                f"executor {self.id}: service_end with empty in-service slot at t={now!r}")
        request, is_probe, start, duration = self.current
        self.current = None
        self.busy_time_accum += duration
        clipped_start = start if start > warmup else warmup
        if now > clipped_start:
            self.busy_time_measured += now - clipped_start
        self.served_count += 1
        self.served_ops += request.ops
        if self.queue:
            nxt_request, nxt_probe = self.queue.popleft()
            self._start_service(nxt_request, nxt_probe, now, equeue)
        return request, is_probe

    def flush_busy(self, horizon, warmup):
        """Credit the still-running service with its busy time up to the horizon.

        Called once when the run stops; affects only the measured (windowed)
        accumulator, never the work-conservation one.
        """
        if self.current is not None:
            _, _, start, _ = self.current
            clipped_start = start if start > warmup else warmup
            if horizon > clipped_start:
                self.busy_time_measured += horizon - clipped_start

    def utilization(self, interval_length):
        """Fraction of the measured interval spent busy, in [0, 1]."""
        if interval_length <= 0:
            raise ValueError("utilization needs a positive measurement interval")
        return self.busy_time_measured / interval_length
