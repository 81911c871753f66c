import math
import random
import time

import pytest
from hypothesis import assume, given, settings, strategies as st

from isacsim.scheduler import (ALLOCATORS, DisagreementPoints, log_nbs_objective, nbs_allocate,
                               nbs_oracle, proportional_split, round_robin_allocate)

T_SYM = (1 + 0.0703) / 30e3


def test_examples():
    d = nbs_allocate(DisagreementPoints(10, 4, 28))
    assert (d.n_sym_s, d.n_sym_c) == (17, 11)
    assert d.feasible and d.scheduler == "nbs"
    prods = {n: (n - 10) * (28 - n - 4) for n in (16, 17, 18)}
    assert prods[17] > prods[16] and prods[17] > prods[18]
    assert nbs_oracle(DisagreementPoints(10, 4, 28)).n_sym_s == 17
    assert nbs_allocate(DisagreementPoints(6, 6, 28)).n_sym_s == 14
    tiny = nbs_oracle(DisagreementPoints(0, 0, 2), T_SYM)
    assert (tiny.n_sym_s, tiny.n_sym_c) == (1, 1)
    assert tiny.nash_product == pytest.approx(T_SYM ** 2)


def test_infeasible_marker_and_fallback():
    d = nbs_allocate(DisagreementPoints(20, 20, 28))
    assert not d.feasible
    assert d.n_sym_s + d.n_sym_c == 28 and d.n_sym_s == 14
    assert proportional_split(DisagreementPoints(30, 10, 28)) == 21
    assert proportional_split(DisagreementPoints(100, 1, 28)) == 27


def test_round_robin():
    assert (round_robin_allocate(DisagreementPoints(0, 0, 28)).n_sym_s,
            round_robin_allocate(DisagreementPoints(0, 0, 28)).n_sym_c) == (14, 14)
    assert round_robin_allocate(DisagreementPoints(0, 0, 2)).n_sym_s == 1
    assert {round_robin_allocate(DisagreementPoints(s, c, 28)).n_sym_s
            for s in range(0, 29, 4) for c in range(0, 29, 4)} == {14}
    assert not round_robin_allocate(DisagreementPoints(20, 2, 28)).feasible
    with pytest.raises(ValueError):
        round_robin_allocate(DisagreementPoints(0, 0, 27))


def test_closed_form_matches_oracle_randomized():
    rng = random.Random(2024)
    t0 = time.perf_counter()
    for _ in range(1000):
        n = rng.randint(2, 1000)
        s = rng.randint(0, n)
        c = rng.randint(0, n - s)
        d = DisagreementPoints(s, c, n)
        a, o = nbs_allocate(d), nbs_oracle(d)
        assert (a.n_sym_s - s) * (a.n_sym_c - c) == (o.n_sym_s - s) * (o.n_sym_c - c)
        assert abs(a.n_sym_s - o.n_sym_s) <= 1
    assert time.perf_counter() - t0 < 5


@settings(max_examples=300, deadline=None)
@given(n=st.integers(2, 400), s=st.integers(0, 400), c=st.integers(0, 400))
def test_budget_and_requirements(n, s, c):
    d = DisagreementPoints(s, c, n)
    for alloc in ALLOCATORS.values():
        if alloc is round_robin_allocate and n % 2:
            continue
        r = alloc(d)
        assert r.n_sym_s + r.n_sym_c == n
        assert 0 <= r.n_sym_s <= n
        if r.feasible:
            assert r.n_sym_s >= s and r.n_sym_c >= c
            assert r.u_sens >= 0 and r.u_com >= 0


@settings(max_examples=200, deadline=None)
@given(n=st.integers(4, 200), s=st.integers(0, 200), c=st.integers(0, 200))
def test_monotone_responses(n, s, c):
    assume(s + 1 + c <= n)
    a = nbs_allocate(DisagreementPoints(s, c, n)).n_sym_s
    assert nbs_allocate(DisagreementPoints(s + 1, c, n)).n_sym_s >= a
    assert nbs_allocate(DisagreementPoints(s, c + 1, n)).n_sym_s <= a
    # two more symbols of sensing demand move the split by exactly one
    if s + 2 + c <= n:
        assert nbs_allocate(DisagreementPoints(s + 2, c, n)).n_sym_s == a + 1


@settings(max_examples=200, deadline=None)
@given(n=st.integers(2, 200), s=st.integers(0, 200), c=st.integers(0, 200), k=st.integers(0, 50))
def test_translation_invariance(n, s, c, k):
    assume(s + c <= n)
    a = nbs_allocate(DisagreementPoints(s, c, n))
    b = nbs_allocate(DisagreementPoints(s + k, c, n + k))
    assert (a.u_sens, a.u_com) == (b.u_sens, b.u_com)


def test_log_objective_symmetry_concavity_and_stationarity():
    rng = random.Random(5)
    d = DisagreementPoints(4, 4, 28)
    vals = {n: log_nbs_objective(d, n) for n in range(5, 24)}
    assert max(vals, key=vals.get) == 14
    for _ in range(300):
        n = rng.randint(6, 300)
        s = rng.randint(0, n - 4)
        c = rng.randint(0, n - s - 4)
        d = DisagreementPoints(s, c, n)
        best = nbs_allocate(d).n_sym_s
        interior = range(s + 1, n - c)
        f = lambda x: log_nbs_objective(d, x)
        for m in (best - 1, best + 1):
            if m in interior and best in interior:
                assert f(best) >= f(m) - 1e-12
        for m in list(interior)[1:-1]:
            assert f(m - 1) - 2 * f(m) + f(m + 1) < 0
        diffs = [f(m + 1) - f(m) for m in list(interior)[:-1]]
        if best in interior and best - 1 in interior and best + 1 in interior:
            assert diffs[best - 1 - (s + 1)] >= -1e-12 and diffs[best - (s + 1)] <= 1e-12
    with pytest.raises(ValueError):
        log_nbs_objective(DisagreementPoints(4, 4, 28), 4)


def test_ramp_response():
    ns = [nbs_allocate(DisagreementPoints(m, 6, 28)).n_sym_s for m in range(2, 21)]
    assert all(b >= a for a, b in zip(ns, ns[1:]))
    nc = [nbs_allocate(DisagreementPoints(6, m, 28)).n_sym_c for m in range(2, 21)]
    assert all(b >= a for a, b in zip(nc, nc[1:]))


def test_validation():
    with pytest.raises(ValueError):
        DisagreementPoints(-1, 0, 28)
    with pytest.raises(ValueError):
        nbs_allocate(DisagreementPoints(0, 0, 1))
    with pytest.raises(ValueError):
        nbs_oracle(DisagreementPoints(0, 0, 20_000))
