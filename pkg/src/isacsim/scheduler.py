"""Per-cycle split of OFDM symbols between sensing and communication.

Both players bargain over the symbols above their minimum requirements
(the disagreement point). Utilities are the surplus times in seconds, so
the Nash product carries a common T_sym**2 factor that does not move the
argmax.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

NBS = "nbs"
ROUND_ROBIN = "rr"


@dataclass(frozen=True)
class DisagreementPoints:
    m_req_s: int
    m_req_c: int
    n_tot: int = 28

    def __post_init__(self):
        if min(self.m_req_s, self.m_req_c, self.n_tot) < 0:
            raise ValueError(f"disagreement points must be non-negative: {self}")

    @property
    def feasible(self) -> bool:
        return self.m_req_s + self.m_req_c <= self.n_tot


@dataclass(frozen=True)
class ScheduleDecision:
    n_sym_s: int
    n_sym_c: int
    u_sens: float
    u_com: float
    feasible: bool
    scheduler: str
    points: DisagreementPoints

    @property
    def nash_product(self) -> float:
        return self.u_sens * self.u_com


def utilities(d: DisagreementPoints, n_sym_s: int, t_symbol: float = 1.0) -> tuple[float, float]:
    return (n_sym_s - d.m_req_s) * t_symbol, (d.n_tot - n_sym_s - d.m_req_c) * t_symbol


def _decision(d, n_s, t_symbol, feasible, scheduler):
    u_s, u_c = utilities(d, n_s, t_symbol)
    return ScheduleDecision(n_s, d.n_tot - n_s, u_s, u_c, feasible, scheduler, d)


def _product(d: DisagreementPoints, n_s: int) -> int:
    # exact integer Nash product in symbol units
    return (n_s - d.m_req_s) * (d.n_tot - n_s - d.m_req_c)


def proportional_split(d: DisagreementPoints) -> int:
    """Sensing share when the requirements exceed the budget."""
    demand = d.m_req_s + d.m_req_c
    if demand == 0:
        return d.n_tot // 2
    n_s = math.floor(d.n_tot * d.m_req_s / demand + 0.5)
    lo = 1 if d.m_req_s > 0 and d.n_tot >= 2 else 0
    hi = d.n_tot - 1 if d.m_req_c > 0 and d.n_tot >= 2 else d.n_tot
    return min(max(n_s, lo), hi)


def nbs_allocate(d: DisagreementPoints, t_symbol: float = 1.0) -> ScheduleDecision:
    """Nash bargaining split from the stationary point of the log objective.

    The continuous optimum (m_req_s + n_tot - m_req_c) / 2 is rounded to the
    better of its floor and ceiling (ties go to sensing). Infeasible points
    fall back to a split proportional to the requirements.
    """
    if d.n_tot < 2:
        raise ValueError("need at least two symbols per cycle")
    if not d.feasible:
        return _decision(d, proportional_split(d), t_symbol, False, NBS)
    lo, hi = d.m_req_s, d.n_tot - d.m_req_c
    star = 0.5 * (d.m_req_s + d.n_tot - d.m_req_c)
    candidates = {min(max(math.floor(star), lo), hi), min(max(math.ceil(star), lo), hi)}
    n_s = max(candidates, key=lambda n: (_product(d, n), n))
    return _decision(d, n_s, t_symbol, True, NBS)


def nbs_oracle(d: DisagreementPoints, t_symbol: float = 1.0) -> ScheduleDecision:
    """Exhaustive search over every integer split; ties go to sensing."""
    if d.n_tot > 10_000:
        raise ValueError("exhaustive search limited to n_tot <= 10000")
    if d.n_tot < 2:
        raise ValueError("need at least two symbols per cycle")
    if not d.feasible:
        return _decision(d, proportional_split(d), t_symbol, False, NBS)
    best, best_p = None, -1
    for n_s in range(d.n_tot + 1):
        u_s, u_c = n_s - d.m_req_s, d.n_tot - n_s - d.m_req_c
        if u_s < 0 or u_c < 0:
            continue
        p = u_s * u_c
        if p >= best_p:
            best, best_p = n_s, p
    return _decision(d, best, t_symbol, True, NBS)


def round_robin_allocate(d: DisagreementPoints, t_symbol: float = 1.0) -> ScheduleDecision:
    """Static half/half split, blind to the requirements.

    ``feasible`` reports whether the fixed split happens to meet both
    minimum requirements in this cycle.
    """
    if d.n_tot % 2:
        raise ValueError("round robin needs an even symbol budget")
    half = d.n_tot // 2
    ok = half >= d.m_req_s and half >= d.m_req_c
    return _decision(d, half, t_symbol, ok, ROUND_ROBIN)


def log_nbs_objective(d: DisagreementPoints, n_sym_s: float, t_symbol: float = 1.0) -> float:
    u_s, u_c = utilities(d, n_sym_s, t_symbol)
    if u_s <= 0 or u_c <= 0:
        raise ValueError(f"n_sym_s={n_sym_s} is not strictly inside the bargaining set of {d}")
    return math.log(u_s) + math.log(u_c)


ALLOCATORS = {NBS: nbs_allocate, ROUND_ROBIN: round_robin_allocate}
