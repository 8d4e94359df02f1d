"""The compiled kernel must reproduce the pure engine bit-for-bit."""

import pytest

from uncoordsim import build_world, compiled_available, load_scenario, run_pure
from uncoordsim.backend import run_compiled
from uncoordsim.scenario import shipped_scenario_path

from conftest import hand_scenario, mm1_scenario, small_world

pytestmark = pytest.mark.skipif(not compiled_available(),
                                reason="compiled kernel not built")


def assert_identical(scenario, seed):
    world = build_world(scenario, seed)
    a = run_pure(scenario, seed, world=world)
    b = run_compiled(scenario, seed, world=world)
    assert a.delay_samples == b.delay_samples  # bitwise float equality
    assert a.traffic_bytes == b.traffic_bytes
    assert a.busy_measured == b.busy_measured
    assert a.busy_total == b.busy_total
    assert a.served_count == b.served_count
    assert a.served_ops == b.served_ops
    assert a.requests_sent == b.requests_sent
    assert a.probes_sent == b.probes_sent
    assert a.created == b.created
    assert a.requests_completed == b.requests_completed
    assert a.requests_fully_responded == b.requests_fully_responded
    assert a.pending_counts == b.pending_counts
    assert a.queue_lens == b.queue_lens
    assert a.in_service == b.in_service
    assert a.final_estimates == b.final_estimates


def test_hand_scenario():
    assert_identical(hand_scenario(), 42)


def test_mm1():
    assert_identical(mm1_scenario(horizon=60.0, warmup=5.0), 7)


@pytest.mark.parametrize("chi", [0.0, 0.1, 0.5, 1.0])
def test_uncoordinated_chi(chi):
    assert_identical(small_world(chi=chi, k=3, rate=60.0), 11)


@pytest.mark.parametrize("kind", ["random", "round_robin", "least_queue_oracle"])
def test_baselines(kind):
    assert_identical(small_world(kind=kind, k=4, rate=80.0), 5)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_shipped_chi_study(seed):
    assert_identical(load_scenario(shipped_scenario_path("chi-study")), seed)


@pytest.mark.parametrize("seed", [1, 2])
def test_shipped_poolsize_study(seed):
    scn = load_scenario(shipped_scenario_path("poolsize-study"))
    assert_identical(scn, seed)
    assert_identical(scn.replace_policy(k=6), seed)
