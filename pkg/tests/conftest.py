"""Shared scenario builders for the test suite."""

import pytest

from uncoordsim import validate_scenario


def exec_spec(eid, pos, speed=1e9):
    return {"id": eid, "speed": speed, "position": list(pos)}


def client_spec(cid, pos, arrival, ops, input_bytes=1000, output_bytes=200):
    return {"id": cid, "position": list(pos),
            "workload": {"arrival": arrival, "ops": ops,
                         "input_bytes": input_bytes, "output_bytes": output_bytes}}


def hand_raw():
    """1 deterministic client, 1 executor: every request takes exactly 4 ms
    (1 ms out + 2 ms service + 1 ms back) and occupies 2 ms of every 10 ms."""
    return {
        "executors": [exec_spec(0, (0, 0))],
        "clients": [client_spec(0, (0, 0),
                                {"kind": "deterministic", "period": 0.01},
                                {"kind": "constant", "mean": 2e6})],
        "network": {"base_latency": 0.001, "latency_per_unit_distance": 0.0},
        "policy": {"kind": "uncoordinated", "k": 1, "chi": 0.0, "alpha": 0.1},
        "horizon_s": 60.0,
        "warmup_s": 10.0,
    }


def hand_scenario():
    return validate_scenario(hand_raw())


def mm1_scenario(rate=80.0, mean_ops=1e7, horizon=120.0, warmup=10.0):
    """Poisson arrivals into one exponential server: service rate is
    speed/mean_ops = 100/s, so sojourn time follows the M/M/1 formula."""
    return validate_scenario({
        "executors": [exec_spec(0, (0, 0))],
        "clients": [client_spec(0, (0, 0),
                                {"kind": "poisson", "rate": rate},
                                {"kind": "exponential", "mean": mean_ops})],
        "network": {"base_latency": 0.001, "latency_per_unit_distance": 0.0},
        "policy": {"kind": "uncoordinated", "k": 1, "chi": 0.0, "alpha": 0.1},
        "horizon_s": horizon,
        "warmup_s": warmup,
    })


def small_world(kind="uncoordinated", k=3, chi=0.1, alpha=0.1, rate=40.0,
                n_executors=4, n_clients=3, horizon=20.0, warmup=2.0,
                arrival=None, ops=None):
    """A little multi-client world with mild queueing, for behavior tests."""
    executors = [exec_spec(i, (10.0 * i, 0.0)) for i in range(n_executors)]
    clients = [client_spec(i, (10.0 * (i % n_executors) + 1.0, 2.0),
                           arrival or {"kind": "poisson", "rate": rate},
                           ops or {"kind": "exponential", "mean": 5e6})
               for i in range(n_clients)]
    return validate_scenario({
        "executors": executors,
        "clients": clients,
        "network": {"base_latency": 0.001, "latency_per_unit_distance": 0.0001},
        "policy": {"kind": kind, "k": k, "chi": chi, "alpha": alpha},
        "horizon_s": horizon,
        "warmup_s": warmup,
    })


@pytest.fixture
def hand():
    return hand_scenario()
