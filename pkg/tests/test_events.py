import random

import pytest

from uncoordsim import SimulationBug
from uncoordsim import events


def test_pop_in_time_order():
    q = events.EventQueue()
    q.schedule(5.0, events.ARRIVAL, client=0)
    q.schedule(3.0, events.ARRIVAL, client=1)
    assert q.pop_next().time == 3.0
    assert q.pop_next().time == 5.0


def test_equal_times_pop_in_insertion_order():
    q = events.EventQueue()
    a = q.schedule(7.0, events.ARRIVAL, client=0)
    b = q.schedule(7.0, events.ARRIVAL, client=1)
    assert a.seq < b.seq
    assert q.pop_next().client == 0
    assert q.pop_next().client == 1


def test_schedule_in_past_is_fatal():
    q = events.EventQueue()
    q.schedule(2.0, events.ARRIVAL, client=0)
    q.pop_next()  # clock is now 2.0
    with pytest.raises(SimulationBug, match="past"):
        q.schedule(1.0, events.ARRIVAL, client=0)


def test_pop_empty_signals_drained():
    q = events.EventQueue()
    assert q.pop_next() is None
    q.schedule(1.0, events.ARRIVAL, client=0)
    assert q.pop_next() is not None
    assert q.pop_next() is None


def test_random_schedule_pops_sorted():
    # oracle: sorting the same (time, insertion index) pairs
    rnd = random.Random(42)
    times = [rnd.uniform(0.0, 100.0) for _ in range(1000)]
    q = events.EventQueue()
    for i, t in enumerate(times):
        q.schedule(t, events.ARRIVAL, client=i)
    expected = [c for _, c in sorted(zip(times, range(len(times))))]
    popped = []
    while (ev := q.pop_next()) is not None:
        popped.append(ev.client)
    assert popped == expected


def test_clock_nondecreasing_and_unique_keys():
    rnd = random.Random(7)
    q = events.EventQueue()
    for i in range(500):
        q.schedule(rnd.choice([1.0, 2.0, 2.0, 3.0]), events.ARRIVAL, client=i)
    seen = set()
    last = -1.0
    while (ev := q.pop_next()) is not None:
        assert ev.time >= last
        last = ev.time
        assert (ev.time, ev.seq) not in seen
        seen.add((ev.time, ev.seq))


def test_emit_now_consumes_seq_and_notifies_observer():
    q = events.EventQueue()
    seen = []
    q.observer = seen.append
    q.schedule(1.0, events.ARRIVAL, client=0)
    q.pop_next()
    ev = q.emit_now(events.SERVICE_START, request=3, executor=1)
    assert ev.time == 1.0
    nxt = q.schedule(1.5, events.SERVICE_END, request=3, executor=1)
    assert nxt.seq == ev.seq + 1
    assert [e.kind for e in seen] == [events.ARRIVAL, events.SERVICE_START]


def test_trace_line_format():
    q = events.EventQueue()
    ev = q.schedule(0.0105, events.REQUEST_SENT, client=2, request=7, executor=1,
                    is_probe=True)
    line = ev.trace_line()
    fields = line.split("\t")
    assert fields[0] == "0.010500000"
    assert fields[1] == "0"
    assert fields[2] == "request_sent"
    assert fields[3] == "client=2 request=7 executor=1 probe=1"
