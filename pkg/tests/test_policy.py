import math

import pytest

from uncoordsim import SimulationBug, policy, rng


def stream(seed=21, sid=0):
    return rng.Stream.for_entity(seed, sid)


def make_state(kind="uncoordinated", pool=(0, 1, 2), est=None, chi=0.1, alpha=0.1):
    est = list(est) if est is not None else [0.002 * (i + 1) for i in range(len(pool))]
    return policy.ClientPolicyState(0, kind, list(pool), est, alpha, chi)


class TestInitEstimates:
    def test_doubles_one_way(self):
        est = policy.init_estimates([0, 1], [0.001, 0.003])
        assert est == [0.002, 0.006]

    def test_equal_latencies_equal_estimates(self):
        est = policy.init_estimates([4, 9], [0.0015, 0.0015])
        assert est[0] == est[1]

    def test_one_entry_per_member(self):
        est = policy.init_estimates(list(range(6)), [0.001] * 6)
        assert len(est) == 6


class TestSelectPrimary:
    def test_argmin(self):
        assert policy.select_primary([0, 1], [0.005, 0.007]) == 0

    def test_tie_breaks_by_executor_id(self):
        # pool ordered by latency, ids need not be ascending
        assert policy.select_primary([3, 1], [0.005, 0.005]) == 1
        assert policy.select_primary([1, 3], [0.005, 0.005]) == 0

    def test_switches_when_estimate_rises(self):
        est = [0.005, 0.006]
        assert policy.select_primary([0, 1], est) == 0
        est[0] = 0.0075
        assert policy.select_primary([0, 1], est) == 1

    def test_empty_is_fatal(self):
        with pytest.raises(SimulationBug):
            policy.select_primary([], [])

    def test_invariant_under_shift_and_scale(self):
        s = stream(3)
        pool = [5, 2, 8, 1]
        for _ in range(200):
            est = [s.next_double() for _ in pool]
            base = policy.select_primary(pool, est)
            assert policy.select_primary(pool, [e + 0.25 for e in est]) == base
            assert policy.select_primary(pool, [e * 3.0 for e in est]) == base


class TestDrawProbeSet:
    def test_chi_zero_never_probes(self):
        s = stream()
        for _ in range(1000):
            assert policy.draw_probe_set([0, 1, 2], 0, 0.0, s) == []

    def test_chi_one_probes_all_secondaries(self):
        s = stream()
        for _ in range(1000):
            assert policy.draw_probe_set([0, 1, 2, 3], 1, 1.0, s) == [0, 2, 3]

    def test_monte_carlo_mean_matches_binomial(self):
        # 10^6 draws at chi=0.1 over 5 secondaries: mean within 3 sigma of 0.5
        chi, k, n = 0.1, 6, 1_000_000
        s = stream(8)
        total = 0
        pool = list(range(k))
        for _ in range(n):
            total += len(policy.draw_probe_set(pool, 0, chi, s))
        mean = total / n
        sigma = math.sqrt((k - 1) * chi * (1 - chi) / n)
        assert abs(mean - chi * (k - 1)) < 3 * sigma

    def test_common_random_numbers_superset_in_chi(self):
        # same stream state, larger chi: the probe set can only grow
        base = stream(13)
        for _ in range(2000):
            lo = policy.draw_probe_set(list(range(5)), 2, 0.1, base.clone())
            hi = policy.draw_probe_set(list(range(5)), 2, 0.4, base.clone())
            assert set(lo) <= set(hi)
            for _ in range(4):
                base.next_u64()


class TestEwma:
    def test_fixed_point(self):
        # fixed point up to one rounding of (1-a)*e + a*e
        for alpha in (0.1, 0.5, 1.0):
            assert policy.ewma_update(0.01, 0.01, alpha) == pytest.approx(0.01, abs=1e-17)

    def test_alpha_one_takes_sample(self):
        assert policy.ewma_update(0.010, 0.025, 1.0) == 0.025

    def test_arithmetic(self):
        assert policy.ewma_update(0.010, 0.020, 0.1) == pytest.approx(0.011, abs=1e-15)


class TestOnResponse:
    def test_updates_estimate(self):
        st = make_state(est=[0.010, 0.020, 0.030])
        policy.on_response(st, st.pool[0], 0.020)
        assert st.estimates[0] == pytest.approx(0.011, abs=1e-15)

    def test_response_outside_pool_is_fatal(self):
        st = make_state(pool=(0, 1))
        with pytest.raises(SimulationBug, match="outside pool"):
            policy.on_response(st, 7, 0.010)

    def test_baselines_do_not_track_estimates(self):
        st = make_state(kind="round_robin", est=[0.010, 0.020, 0.030])
        policy.on_response(st, st.pool[0], 0.5)
        assert st.estimates == [0.010, 0.020, 0.030]


class TestBaselineSelect:
    def test_round_robin_cycles(self):
        st = make_state(kind="round_robin", pool=(4, 2))
        picks = [policy.baseline_select(st, stream(), None) for _ in range(4)]
        assert picks == [0, 1, 0, 1]  # slots: pool order a,b,a,b

    def test_oracle_picks_least_loaded(self):
        st = make_state(kind="least_queue_oracle", pool=(0, 1))
        counts = {0: 3, 1: 0}
        assert policy.baseline_select(st, stream(), counts) == 1

    def test_oracle_tie_breaks_by_id(self):
        st = make_state(kind="least_queue_oracle", pool=(2, 1))
        assert policy.baseline_select(st, stream(), {1: 2, 2: 2}) == 1

    def test_random_is_roughly_uniform(self):
        st = make_state(kind="random", pool=(0, 1))
        s = stream(17)
        n = 100_000
        ones = sum(policy.baseline_select(st, s, None) for _ in range(n))
        sigma = math.sqrt(n * 0.25)
        assert abs(ones - n / 2) < 3 * sigma


class TestPlanDispatch:
    def test_counters(self):
        st = make_state(chi=1.0)
        primary, probes = policy.plan_dispatch(st, stream())
        assert st.requests_sent == 1
        assert st.probes_sent == 2
        assert primary not in probes
        assert len(probes) == 2

    def test_chi_zero_single_send(self):
        st = make_state(chi=0.0)
        for _ in range(100):
            _, probes = policy.plan_dispatch(st, stream())
            assert probes == []
        assert st.requests_sent == 100
        assert st.probes_sent == 0

    def test_expected_sends_per_request(self):
        # E[copies] = 1 + chi * (k - 1); 3-sigma Monte Carlo check
        chi, k, n = 0.5, 2, 100_000
        st = make_state(pool=(0, 1), est=[0.002, 0.004], chi=chi)
        s = stream(23)
        copies = 0
        for _ in range(n):
            _, probes = policy.plan_dispatch(st, s)
            copies += 1 + len(probes)
        mean = copies / n
        sigma = math.sqrt((k - 1) * chi * (1 - chi) / n)
        assert abs(mean - (1 + chi * (k - 1))) < 3 * sigma
