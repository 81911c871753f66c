"""Discrete-event world model and per-cycle orchestration.

Time advances in whole cycles (1 ms subframes). Events are kept in a heap
keyed by ``(cycle, kind, seq)`` so simultaneous events always run
in the same order: traffic-rate changes, then AGV turns, then the BS cycle.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from . import channel, sensing, urllc
from .config import SimConfig
from .metrics import CYCLE_COLUMNS, MetricsReport
from .scheduler import ALLOCATORS, DisagreementPoints

STREAMS = ("traffic", "channel", "harq", "mobility", "detection")


def rng_streams(seed: int) -> dict[str, np.random.Generator]:
    """Independent generators per subsystem, all derived from one seed.

    Stream ``i`` of ``STREAMS`` uses ``SeedSequence(seed, spawn_key=(i,))``.
    """
    return {name: np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(i,))))
            for i, name in enumerate(STREAMS)}


class Track:
    """Polyline the AGV is confined to, parameterised by arc length."""

    def __init__(self, points):
        self.points = np.asarray(points, dtype=float)
        seg = np.hypot(*np.diff(self.points, axis=0).T)
        self.cum = np.concatenate([[0.0], np.cumsum(seg)])
        if self.cum[-1] <= 0:
            raise ValueError("track has zero length")

    @property
    def length(self) -> float:
        return float(self.cum[-1])

    def xy(self, s: float) -> tuple[float, float]:
        s = min(max(s, 0.0), self.length)
        return float(np.interp(s, self.cum, self.points[:, 0])), float(np.interp(s, self.cum, self.points[:, 1]))


@dataclass
class AgvState:
    position: float
    direction: int = 1
    speed: float = 4.0
    present: bool = True


def step_agv(rng: np.random.Generator | None, agv: AgvState, dt: float, track: Track,
             turn: bool = False) -> AgvState:
    """Advance the AGV by ``dt`` along the track, reflecting at the ends.

    With ``turn`` the direction is first redrawn uniformly from {-1, +1}.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    direction = agv.direction
    if turn:
        direction = 1 if rng.random() < 0.5 else -1
    pos = agv.position + direction * agv.speed * dt
    length = track.length
    while pos < 0 or pos > length:
        if pos < 0:
            pos, direction = -pos, 1
        else:
            pos, direction = 2 * length - pos, -1
    return AgvState(pos, direction, agv.speed, agv.present)


class Hall:
    def __init__(self, width: float, height: float, sectors: list[channel.SectorProfile]):
        self.width, self.height = width, height
        self.sectors = sectors

    def sector_index(self, x: float, y: float) -> int:
        for i, s in enumerate(self.sectors):
            if s.contains(x, y):
                return i
        # far hall walls are closed
        for i, s in enumerate(self.sectors):
            x0, y0, x1, y1 = s.bounds
            if x0 <= x <= x1 and y0 <= y <= y1:
                return i
        raise ValueError(f"point ({x}, {y}) is not covered by any sector")


class Event(IntEnum):
    RATE_CHANGE = 0
    AGV_TURN = 1
    CYCLE = 2


class Simulation:
    """One seeded run of one scheduler over ``cfg.run.horizon`` seconds."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.rng = rng_streams(cfg.run.seed)
        self.radar = cfg.radar_params()
        self.target = cfg.detection_target()
        self.gamma_min = sensing.required_snr(self.target)
        self.profile = cfg.urllc_profile()
        self.geom = cfg.geometry()
        self.hall = Hall(cfg.hall.width, cfg.hall.height, cfg.sector_profiles())
        self.track = Track(cfg.hall.track)
        self.bs_xy = tuple(cfg.radio.bs_position)
        self.allocate = ALLOCATORS[cfg.run.scheduler]
        t = cfg.traffic
        self.source = urllc.TrafficSource(t.rate_set(), cfg.urllc.n_users, t.scope,
                                          t.fixed_rate if t.fixed_rate >= 0 else None)
        self.queue = urllc.UrllcQueue(cfg.urllc.n_users, self.profile)
        start = cfg.agv.start if cfg.agv.start >= 0 else self.rng["mobility"].random() * self.track.length
        self.agv = AgvState(min(start, self.track.length), 1, cfg.agv.speed)
        self.n_cycles = int(round(cfg.run.horizon / cfg.radio.cycle_length))
        self.cycle = 0
        self.records = {name: np.zeros(self.n_cycles, dtype=dt) for name, dt in CYCLE_COLUMNS}
        self._decision = None
        self._events: list = []
        self._seq = 0
        self._turn_pending = False

    # event plumbing --------------------------------------------------------

    def _schedule(self, cycle: int, kind: Event) -> None:
        if cycle < self.n_cycles:
            heapq.heappush(self._events, (cycle, int(kind), self._seq, kind))
            self._seq += 1

    def _period_cycles(self, seconds: float) -> int:
        return max(1, int(round(seconds / self.cfg.radio.cycle_length)))

    def run(self) -> MetricsReport:
        self._schedule(0, Event.RATE_CHANGE)
        self._schedule(0, Event.CYCLE)
        self._schedule(self._period_cycles(self.cfg.agv.turn_period), Event.AGV_TURN)
        while self._events:
            cycle, _, _, kind = heapq.heappop(self._events)
            if kind is Event.RATE_CHANGE:
                self.source.resample(self.rng["traffic"])
                self._schedule(cycle + self._period_cycles(self.cfg.traffic.resample_period), Event.RATE_CHANGE)
            elif kind is Event.AGV_TURN:
                self._turn_pending = True
                self._schedule(cycle + self._period_cycles(self.cfg.agv.turn_period), Event.AGV_TURN)
            else:
                self.run_cycle()
                self._schedule(cycle + 1, Event.CYCLE)
        return MetricsReport.from_simulation(self)

    # one subframe ----------------------------------------------------------

    def run_cycle(self) -> None:
        cfg, c = self.cfg, self.cycle
        dt = cfg.radio.cycle_length
        t0 = c * dt
        t_sym = cfg.t_symbol
        n_tot = cfg.radio.symbols_per_cycle

        users, times = urllc.draw_arrivals(self.rng["traffic"], self.source, t0, dt)
        self.queue.add(users, times)

        x, y = self.track.xy(self.agv.position)
        k = self.hall.sector_index(x, y)
        sector = self.hall.sectors[k]
        d2d, d3d = self.geom.distances(self.bs_xy, (x, y))
        pl_plan = channel.expected_path_loss(sector, self.geom, cfg.radio.fc_ghz, d2d, d3d)
        req = sensing.min_sensing_symbols(self.radar, self.target, pl_plan, n_tot, self.gamma_min)
        # a detection attempt needs at least one symbol
        m_s = max(1, req.symbols)
        backlog = self.queue.backlog
        _, m_c = urllc.min_comm_time(self.profile, backlog, n_tot)

        if self._decision is None or c % cfg.run.reschedule_period == 0:
            self._decision = self.allocate(DisagreementPoints(m_s, m_c, n_tot), t_sym)
        dec = self._decision
        n_s, n_c = dec.n_sym_s, dec.n_sym_c

        link = channel.sample_link_state(self.rng["channel"], sector, self.geom, cfg.radio.fc_ghz,
                                         d2d, d3d, shadowing=cfg.radar.shadowing)
        gamma = sensing.sensing_snr(self.radar, link.total_db, n_s)
        pd = sensing.detection_probability(gamma, self.target.pfa, self.target.formula)
        detected = self.rng["detection"].random() < pd

        attempts = urllc.serve_comm_window(self.rng["harq"], self.queue, n_c, t0 + n_s * t_sym)

        r = self.records
        r["cycle"][c] = c
        r["n_sym_s"][c] = n_s
        r["n_sym_c"][c] = n_c
        r["m_req_s"][c] = m_s
        r["m_req_c"][c] = m_c
        r["feasible"][c] = dec.feasible
        r["over_budget"][c] = req.over_budget
        r["pd"][c] = pd
        r["gamma_sens"][c] = gamma
        r["detected"][c] = detected
        r["is_los"][c] = link.is_los
        r["path_loss_db"][c] = link.total_db
        r["sector"][c] = k
        r["agv_distance"][c] = d2d
        r["backlog"][c] = backlog
        r["attempts"][c] = attempts

        self.agv = step_agv(self.rng["mobility"], self.agv, dt, self.track, turn=self._turn_pending)
        self._turn_pending = False
        self.cycle += 1


def run_simulation(cfg: SimConfig) -> MetricsReport:
    return Simulation(cfg).run()
