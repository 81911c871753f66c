"""Downlink URLLC traffic: RB sizing, HARQ budgeting, Poisson arrivals and a
per-user FIFO queue served round-robin inside each communication window."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .sensing import ceil_tol

PENDING, DONE, FAILED = 0, 1, 2


@dataclass(frozen=True)
class UrllcProfile:
    packet_size_bits: int = 256
    bler: float = 1e-3
    reliability: float = 1e-5
    survival_time: float = 1e-3
    retx_limit: int = 3
    mcs_efficiency: float = 1.0
    rb_bandwidth_hz: float = 360e3
    symbols_per_tti: int = 2
    t_symbol: float = (1 + 0.0703) / 30e3
    n_rb: int = 273

    def __post_init__(self):
        if not 0 <= self.bler < 1:
            raise ValueError(f"bler must lie in [0, 1), got {self.bler}")
        if not 0 < self.reliability < 1:
            raise ValueError(f"reliability must lie in (0, 1), got {self.reliability}")
        if self.retx_limit < 0 or self.survival_time <= 0:
            raise ValueError("retx_limit must be >= 0 and survival_time > 0")
        if self.symbols_per_tti < 1 or self.n_rb < 1:
            raise ValueError("symbols_per_tti and n_rb must be >= 1")

    @property
    def max_attempts(self) -> int:
        return 1 + self.retx_limit

    @property
    def rbs_per_packet(self) -> int:
        return required_rbs(self)

    @property
    def packets_per_tti(self) -> int:
        """Packets that fit side by side in frequency within one TTI."""
        per = self.n_rb // self.rbs_per_packet
        if per < 1:
            raise ValueError(f"a packet needs {self.rbs_per_packet} RBs but only {self.n_rb} exist")
        return per


@dataclass
class UrllcPacket:
    user_id: int
    arrival_time: float
    size_bits: int
    tx_attempts: list[tuple[float, bool]] = field(default_factory=list)
    completion_time: float | None = None

    @property
    def delay(self) -> float | None:
        if self.completion_time is None:
            return None
        return self.completion_time - self.arrival_time


def required_rbs(profile: UrllcProfile) -> int:
    per_rb = profile.mcs_efficiency * profile.rb_bandwidth_hz * profile.symbols_per_tti * profile.t_symbol
    if profile.packet_size_bits < 1 or per_rb <= 0:
        raise ValueError("packet size, MCS efficiency, RB bandwidth, TTI and symbol time must be positive")
    return ceil_tol(profile.packet_size_bits / per_rb)


def required_transmissions(delta: float, reliability: float) -> int:
    """Transmissions needed so that delta**n <= reliability."""
    if not 0 < delta < 1:
        raise ValueError(f"BLER must lie in (0, 1), got {delta}")
    if not 0 < reliability < 1:
        raise ValueError(f"reliability target must lie in (0, 1), got {reliability}")
    return max(1, ceil_tol(math.log(reliability) / math.log(delta)))


def min_comm_time(profile: UrllcProfile, backlog: int, n_tot: int = 28) -> tuple[float, int]:
    """Minimum communication time (seconds, symbols) for the current backlog.

    Each packet needs min(n_tx * T_sym, D_max). Packets that share a TTI in
    frequency share that time, so the backlog is counted in groups of
    ``packets_per_tti``; the total is capped at the cycle budget.
    """
    if backlog < 0:
        raise ValueError("backlog must be non-negative")
    if backlog == 0:
        return 0.0, 0
    if profile.bler > 0:
        n_tx = required_transmissions(profile.bler, profile.reliability)
    else:
        n_tx = 1
    per_packet = min(n_tx * profile.t_symbol, profile.survival_time)
    groups = math.ceil(backlog / profile.packets_per_tti)
    total = min(groups * per_packet, n_tot * profile.t_symbol)
    return total, ceil_tol(total / profile.t_symbol)


class TrafficSource:
    """Per-user Poisson sources whose rates are redrawn every second.

    ``rates`` are BS-level (cumulative) packet rates. With ``scope="user"``
    each user draws its own value and contributes a 1/n_users share of it;
    with ``scope="bs"`` one value is drawn for the BS and split evenly.
    ``fixed_rate`` pins the cumulative rate for controlled experiments.
    """

    def __init__(self, rates, n_users: int, scope: str = "user", fixed_rate: float | None = None):
        self.rates = np.asarray(rates, dtype=float)
        if self.rates.size == 0 and fixed_rate is None:
            raise ValueError("empty rate set")
        if scope not in ("user", "bs"):
            raise ValueError(f"unknown traffic scope {scope!r}")
        self.n_users = n_users
        self.scope = scope
        self.fixed_rate = fixed_rate
        self.user_rates = np.zeros(n_users)

    def resample(self, rng: np.random.Generator) -> None:
        if self.fixed_rate is not None:
            self.user_rates[:] = self.fixed_rate / self.n_users
        elif self.scope == "user":
            self.user_rates = rng.choice(self.rates, size=self.n_users) / self.n_users
        else:
            self.user_rates[:] = rng.choice(self.rates) / self.n_users

    @property
    def total_rate(self) -> float:
        return float(self.user_rates.sum())


def draw_arrivals(rng: np.random.Generator, source: TrafficSource, t0: float, dt: float):
    """Arrivals in ``[t0, t0 + dt)`` as ``(user_ids, times)`` sorted by user then time."""
    counts = rng.poisson(source.user_rates * dt)
    n = int(counts.sum())
    users = np.repeat(np.arange(source.n_users), counts)
    times = t0 + dt * rng.random(n)
    order = np.lexsort((times, users))
    return users[order], times[order]


def _round_robin_share(avail: list[int], slots: int, start: int) -> list[int]:
    """Split ``slots`` over users as evenly as their queues allow.

    Leftover single slots go to users in round-robin order from ``start``.
    """
    total = sum(avail)
    if total <= slots:
        return list(avail)
    n = len(avail)
    give = [0] * n
    left = slots
    while left > 0:
        active = [u for u in range(n) if avail[u] > give[u]]
        per = left // len(active)
        if per == 0:
            order = [(start + i) % n for i in range(n)]
            for u in order:
                if left == 0:
                    break
                if avail[u] > give[u]:
                    give[u] += 1
                    left -= 1
            break
        for u in active:
            add = min(per, avail[u] - give[u])
            give[u] += add
            left -= add
    return give


class UrllcQueue:
    """Packet store plus per-user FIFO state for one simulation run.

    Packets live in growable column arrays. Each user has a FIFO of fresh
    packets and a HARQ list of packets whose last attempt failed; the HARQ
    list is served first in the next communication window.
    """

    def __init__(self, n_users: int, profile: UrllcProfile, capacity: int = 4096):
        self.n_users = n_users
        self.profile = profile
        self.size = 0
        self.arrival = np.empty(capacity)
        self.user = np.empty(capacity, dtype=np.int32)
        self.attempts = np.zeros(capacity, dtype=np.int8)
        self.status = np.zeros(capacity, dtype=np.int8)
        self.completion = np.full(capacity, np.nan)
        self.attempt_start = np.full((capacity, profile.max_attempts), np.nan)
        self.attempt_ok = np.zeros((capacity, profile.max_attempts), dtype=bool)
        self._fifo = [np.empty(256, dtype=np.int64) for _ in range(n_users)]
        self._head = [0] * n_users
        self._tail = [0] * n_users
        self._retx: list[list[int]] = [[] for _ in range(n_users)]
        self._rr = 0

    def _grow(self, need: int) -> None:
        cap = len(self.arrival)
        if need <= cap:
            return
        new = max(need, 2 * cap)
        for name in ("arrival", "user", "attempts", "status", "completion"):
            old = getattr(self, name)
            arr = np.empty(new, dtype=old.dtype) if name not in ("attempts", "status", "completion") \
                else np.full(new, np.nan if name == "completion" else 0, dtype=old.dtype)
            arr[:cap] = old
            setattr(self, name, arr)
        a = np.full((new, self.profile.max_attempts), np.nan)
        a[:cap] = self.attempt_start
        self.attempt_start = a
        ok = np.zeros((new, self.profile.max_attempts), dtype=bool)
        ok[:cap] = self.attempt_ok
        self.attempt_ok = ok

    def add(self, users: np.ndarray, times: np.ndarray) -> None:
        """Enqueue arrivals given sorted by user, then time."""
        n = len(users)
        if n == 0:
            return
        start = self.size
        self._grow(start + n)
        self.arrival[start:start + n] = times
        self.user[start:start + n] = users
        self.size += n
        idx = np.arange(start, start + n)
        bounds = np.searchsorted(users, np.arange(self.n_users + 1))
        for u in range(self.n_users):
            lo, hi = bounds[u], bounds[u + 1]
            if hi == lo:
                continue
            self._push(u, idx[lo:hi])

    def _push(self, u: int, idx: np.ndarray) -> None:
        fifo, head, tail = self._fifo[u], self._head[u], self._tail[u]
        k = len(idx)
        if tail + k > len(fifo):
            live = tail - head
            new = np.empty(max(2 * (live + k), 256), dtype=np.int64)
            new[:live] = fifo[head:tail]
            self._fifo[u], head, tail = new, 0, live
            self._head[u] = 0
            fifo = new
        fifo[tail:tail + k] = idx
        self._tail[u] = tail + k

    @property
    def backlog(self) -> int:
        return sum(t - h for h, t in zip(self._head, self._tail)) + sum(len(r) for r in self._retx)

    def pending_of(self, u: int) -> list[int]:
        """Packet indices of user ``u`` in service order."""
        return list(self._retx[u]) + self._fifo[u][self._head[u]:self._tail[u]].tolist()

    def packet(self, i: int) -> UrllcPacket:
        n = int(self.attempts[i])
        tries = [(float(self.attempt_start[i, j]), bool(self.attempt_ok[i, j])) for j in range(n)]
        done = self.status[i] == DONE
        return UrllcPacket(int(self.user[i]), float(self.arrival[i]), self.profile.packet_size_bits,
                           tries, float(self.completion[i]) if done else None)

    def serve(self, rng: np.random.Generator, tti_starts: np.ndarray) -> int:
        """Run one communication window whose TTIs begin at ``tti_starts``.

        Returns the number of transmission attempts made.
        """
        n_tti = len(tti_starts)
        if n_tti == 0 or self.backlog == 0:
            return 0
        prof = self.profile
        slots = prof.packets_per_tti
        n_u = self.n_users
        # eligible fresh packets per user at each TTI start: arrival <= start
        elig = np.zeros((n_tti, n_u), dtype=np.int64)
        n_retx = [len(r) for r in self._retx]
        for u in range(n_u):
            h, t = self._head[u], self._tail[u]
            if t > h:
                arr = self.arrival[self._fifo[u][h:t]]
                elig[:, u] = np.searchsorted(arr, tti_starts, side="right")
        elig += np.asarray(n_retx, dtype=np.int64)
        taken = [0] * n_u
        per_tti = np.zeros((n_tti, n_u), dtype=np.int64)
        for j in range(n_tti):
            avail = [int(e) - tk for e, tk in zip(elig[j], taken)]
            if not any(avail):
                continue
            give = _round_robin_share(avail, slots, self._rr)
            if sum(give) < sum(avail):
                self._rr = (self._rr + 1) % n_u
            per_tti[j] = give
            taken = [a + b for a, b in zip(taken, give)]
        total = sum(taken)
        if total == 0:
            return 0
        served, start_t = [], []
        for u in range(n_u):
            if taken[u] == 0:
                continue
            from_retx = min(taken[u], n_retx[u])
            ids = self._retx[u][:from_retx]
            fresh = taken[u] - from_retx
            h = self._head[u]
            ids = np.concatenate([np.asarray(ids, dtype=np.int64), self._fifo[u][h:h + fresh]])
            self._head[u] = h + fresh
            self._retx[u] = self._retx[u][from_retx:]
            served.append(ids)
            start_t.append(np.repeat(tti_starts, per_tti[:, u]))
        ids = np.concatenate(served)
        starts = np.concatenate(start_t)
        ok = rng.random(total) >= prof.bler
        slot = self.attempts[ids].astype(np.int64)
        self.attempt_start[ids, slot] = starts
        self.attempt_ok[ids, slot] = ok
        self.attempts[ids] += 1
        done = ids[ok]
        self.completion[done] = starts[ok] + prof.symbols_per_tti * prof.t_symbol
        self.status[done] = DONE
        bad = ids[~ok]
        if len(bad):
            exhausted = self.attempts[bad] >= prof.max_attempts
            self.status[bad[exhausted]] = FAILED
            for i in bad[~exhausted].tolist():
                self._retx[int(self.user[i])].append(i)
        return total


def tti_starts(window_start: float, n_sym_c: int, profile: UrllcProfile) -> np.ndarray:
    n_tti = n_sym_c // profile.symbols_per_tti
    return window_start + np.arange(n_tti) * profile.symbols_per_tti * profile.t_symbol


def serve_comm_window(rng: np.random.Generator, queue: UrllcQueue, n_sym_c: int,
                      window_start: float) -> int:
    """Serve ``queue`` over ``n_sym_c`` communication symbols from ``window_start``."""
    if n_sym_c < 0:
        raise ValueError("n_sym_c must be non-negative")
    return queue.serve(rng, tti_starts(window_start, n_sym_c, queue.profile))
