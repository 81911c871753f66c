import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isacsim import urllc
from isacsim.urllc import DONE, FAILED, PENDING, TrafficSource, UrllcProfile, UrllcQueue

T_SYM = (1 + 0.0703) / 30e3
PROF = UrllcProfile()


def test_required_rbs_examples():
    per_rb = PROF.mcs_efficiency * PROF.rb_bandwidth_hz * PROF.symbols_per_tti * PROF.t_symbol
    exact = replace(PROF, packet_size_bits=1, mcs_efficiency=1.0 / per_rb)
    assert urllc.required_rbs(exact) == 1
    assert urllc.required_rbs(replace(exact, packet_size_bits=2)) == 2
    assert urllc.required_rbs(PROF) == 10
    assert PROF.packets_per_tti == 27


def test_required_transmissions_examples():
    assert urllc.required_transmissions(1e-3, 1e-3) == 1
    assert urllc.required_transmissions(1e-3, 1e-5) == 2
    assert urllc.required_transmissions(0.1, 1e-3) == 3
    with pytest.raises(ValueError):
        urllc.required_transmissions(0.0, 1e-5)


@settings(max_examples=300, deadline=None)
@given(delta=st.floats(1e-6, 0.99), sigma=st.floats(1e-9, 0.99))
def test_required_transmissions_bracket(delta, sigma):
    n = urllc.required_transmissions(delta, sigma)
    assert delta ** n <= sigma * (1 + 1e-9)
    if n > 1:
        assert sigma < delta ** (n - 1)


def test_min_comm_time_examples():
    assert urllc.min_comm_time(PROF, 0) == (0.0, 0)
    one_per_tti = replace(PROF, n_rb=10)  # one packet per TTI
    secs, syms = urllc.min_comm_time(one_per_tti, 3)
    assert secs == pytest.approx(3 * 2 * T_SYM)
    assert syms == 6
    # per-packet time is capped at the survival time
    slow = replace(one_per_tti, bler=0.5, reliability=1e-9, survival_time=4 * T_SYM)
    assert urllc.min_comm_time(slow, 1)[1] == 4
    # frequency multiplexing: 27 packets share one TTI pair
    assert urllc.min_comm_time(PROF, 27)[1] == 2
    assert urllc.min_comm_time(PROF, 28)[1] == 4
    assert urllc.min_comm_time(PROF, 10**6)[1] == 28


def test_arrivals_zero_rate_and_seeded():
    src = TrafficSource([0.0], 10)
    src.resample(np.random.default_rng(0))
    u, t = urllc.draw_arrivals(np.random.default_rng(0), src, 0.0, 1e-3)
    assert len(u) == 0
    src = TrafficSource([5e4], 10)
    src.resample(np.random.default_rng(0))
    a = urllc.draw_arrivals(np.random.default_rng(4), src, 0.2, 1e-3)
    b = urllc.draw_arrivals(np.random.default_rng(4), src, 0.2, 1e-3)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    assert np.all((a[1] >= 0.2) & (a[1] < 0.201))
    assert np.all(np.diff(a[0]) >= 0)


def test_arrival_rate_law_of_large_numbers():
    src = TrafficSource([1e4], 10, fixed_rate=1e4)
    src.resample(None)
    rng = np.random.default_rng(8)
    counts = [len(urllc.draw_arrivals(rng, src, k * 1e-3, 1e-3)[0]) for k in range(20_000)]
    assert abs(np.mean(counts) - 10) <= 0.5


def test_traffic_scopes():
    rng = np.random.default_rng(1)
    s = TrafficSource([1000.0, 2000.0], 4, scope="bs")
    s.resample(rng)
    assert len(set(s.user_rates)) == 1 and s.total_rate in (1000.0, 2000.0)
    s = TrafficSource(np.arange(1, 401) * 1000.0, 10, scope="user")
    s.resample(rng)
    assert s.total_rate <= 400000.0


def _queue_with(profile, times_by_user):
    q = UrllcQueue(len(times_by_user), profile)
    users = np.concatenate([[u] * len(ts) for u, ts in enumerate(times_by_user)]).astype(int)
    times = np.concatenate([np.sort(ts) for ts in times_by_user])
    q.add(users, times)
    return q


def test_no_errors_first_attempt_and_delay():
    prof = replace(PROF, bler=0.0)
    q = _queue_with(prof, [[0.0, 1e-5], [2e-5]])
    n = urllc.serve_comm_window(np.random.default_rng(0), q, 4, 1e-4)
    assert n == 3
    assert np.all(q.status[:3] == DONE) and np.all(q.attempts[:3] == 1)
    assert np.allclose(q.completion[:3], 1e-4 + 2 * T_SYM)


def test_empty_window_is_noop():
    q = _queue_with(PROF, [[0.0], [0.0]])
    before = q.backlog
    assert urllc.serve_comm_window(np.random.default_rng(0), q, 0, 1e-3) == 0
    assert q.backlog == before and np.all(q.attempts[:2] == 0)
    # one leftover symbol is below a TTI
    assert urllc.serve_comm_window(np.random.default_rng(0), q, 1, 1e-3) == 0


def test_packets_not_served_before_arrival():
    prof = replace(PROF, bler=0.0)
    q = _queue_with(prof, [[5e-4]])
    # window of 14 TTIs starting at 0: only TTIs from 5e-4 on may carry it
    assert urllc.serve_comm_window(np.random.default_rng(0), q, 28, 0.0) == 1
    assert q.completion[0] >= q.arrival[0] + 2 * T_SYM


def test_harq_failure_fraction():
    prof = replace(PROF, bler=0.5, retx_limit=3)
    rng = np.random.default_rng(12)
    n = 20_000
    q = UrllcQueue(10, prof)
    users = np.sort(rng.integers(0, 10, n))
    q.add(users, np.zeros(n))
    t = 1e-3
    while q.backlog:
        urllc.serve_comm_window(rng, q, 28, t)
        t += 1e-3
    status = q.status[:n]
    assert abs(np.mean(status == FAILED) - 0.0625) <= 0.01
    assert q.attempts[:n].max() == 4
    assert np.all(q.attempts[:n][status == FAILED] == 4)


def test_fifo_per_user_and_round_robin_share():
    prof = replace(PROF, bler=0.0, n_rb=10)  # one packet per TTI
    q = _queue_with(prof, [[0.0, 1e-6, 2e-6], [0.0, 1e-6]])
    urllc.serve_comm_window(np.random.default_rng(0), q, 8, 1e-3)  # four TTIs
    # users alternate and each user's packets complete in arrival order
    assert q.status[:5].tolist() == [DONE, DONE, PENDING, DONE, DONE]
    assert q.completion[0] < q.completion[1] and q.completion[3] < q.completion[4]
    assert q.pending_of(0) == [2]


def test_round_robin_share_water_filling():
    assert urllc._round_robin_share([5, 1, 0], 4, 0) == [3, 1, 0]
    assert urllc._round_robin_share([2, 2, 2], 10, 0) == [2, 2, 2]
    give = urllc._round_robin_share([4, 4, 4], 5, 1)
    assert sum(give) == 5 and max(give) - min(give) <= 1


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), n_sym=st.integers(0, 28), n=st.integers(0, 300),
       bler=st.sampled_from([0.0, 1e-3, 0.3]))
def test_queue_invariants(seed, n_sym, n, bler):
    prof = replace(PROF, bler=bler)
    rng = np.random.default_rng(seed)
    q = UrllcQueue(5, prof)
    users = np.sort(rng.integers(0, 5, n))
    times = rng.random(n) * 1e-3
    order = np.lexsort((times, users))
    q.add(users[order], times[order])
    t = 1e-3
    for _ in range(3):
        before = q.backlog
        made = urllc.serve_comm_window(rng, q, n_sym, t)
        # work conservation: a full window was used unless the backlog ran out
        cap = (n_sym // prof.symbols_per_tti) * prof.packets_per_tti
        assert made == min(before, cap)
        t += 1e-3
    k = q.size
    assert q.attempts[:k].max(initial=0) <= prof.max_attempts
    done = q.status[:k] == DONE
    delay = q.completion[:k][done] - q.arrival[:k][done]
    assert np.all(delay >= prof.symbols_per_tti * prof.t_symbol - 1e-15)
    pending = sum(q.status[:k] == PENDING)
    assert pending == q.backlog


def test_packet_view():
    prof = replace(PROF, bler=0.0)
    q = _queue_with(prof, [[0.0]])
    urllc.serve_comm_window(np.random.default_rng(0), q, 2, 1e-3)
    p = q.packet(0)
    assert p.delay == pytest.approx(1e-3 + 2 * T_SYM)
    assert p.tx_attempts == [(1e-3, True)]
