"""OFDM radar detection chain: echo SNR, coherent integration, detection
probability and the minimum number of sensing symbols per cycle."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .marcum import marcum_q1

SPEED_OF_LIGHT = 299_792_458.0
BOLTZMANN = 1.380649e-23

PD_FORMULAS = ("paper", "classical")


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


@dataclass(frozen=True)
class RadarParams:
    tx_power_dbm: float = 30.0
    beamwidth_rad: float = math.radians(27.0)
    rcs_dbsm: float = 7.0
    fc_hz: float = 3.5e9
    scs_hz: float = 30e3
    n_sc_sens: int = 3276
    noise_figure_db: float = 9.0
    temp_k: float = 290.0
    cp_fraction: float = 0.0703

    def __post_init__(self):
        if not 0 < self.beamwidth_rad <= 2 * math.pi:
            raise ValueError(f"beamwidth must lie in (0, 2*pi] rad, got {self.beamwidth_rad}")
        for name in ("fc_hz", "scs_hz", "n_sc_sens", "temp_k"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.cp_fraction < 0:
            raise ValueError("cp_fraction must be non-negative")

    @property
    def gain(self) -> float:
        return 4.0 * math.pi / self.beamwidth_rad ** 2

    @property
    def t_symbol(self) -> float:
        return (1.0 + self.cp_fraction) / self.scs_hz

    def _signal_term(self) -> float:
        # P_tx G^2 f_c^2 4 pi sigma_rcs, linear SI
        p_tx = db_to_linear(self.tx_power_dbm - 30.0)
        return p_tx * self.gain ** 2 * self.fc_hz ** 2 * 4.0 * math.pi * db_to_linear(self.rcs_dbsm)

    def _noise_term(self) -> float:
        # c^2 k_B T F delta_f, i.e. noise per subcarrier scaled by c^2
        return SPEED_OF_LIGHT ** 2 * BOLTZMANN * self.temp_k * db_to_linear(self.noise_figure_db) * self.scs_hz


@dataclass(frozen=True)
class DetectionTarget:
    pd_target: float = 0.9
    pfa: float = 1e-4
    formula: str = "paper"

    def __post_init__(self):
        if not 0 < self.pfa < self.pd_target < 1:
            raise ValueError(f"need 0 < pfa < pd_target < 1, got pfa={self.pfa}, pd={self.pd_target}")
        if self.formula not in PD_FORMULAS:
            raise ValueError(f"unknown pd formula {self.formula!r}")

    @property
    def gamma_sens_min(self) -> float:
        return required_snr(self)


class SymbolRequirement(NamedTuple):
    symbols: int
    over_budget: bool


def ceil_tol(x: float) -> int:
    """Ceiling that ignores float noise just above an integer."""
    return math.ceil(x * (1.0 - 1e-12) - 1e-12)


def echo_snr_per_symbol(params: RadarParams, pl_db: float) -> float:
    """Per-symbol echo SNR with noise taken over all sensing subcarriers.

    ``pl_db`` is the one-way path loss; the echo travels it twice.
    """
    pl2 = db_to_linear(2.0 * pl_db)
    return params._signal_term() / (pl2 * params._noise_term() * params.n_sc_sens)


def integrated_snr(gamma: float, n_sym_s: int, n_sc_sens: int) -> float:
    return gamma * n_sc_sens * n_sym_s


def sensing_snr(params: RadarParams, pl_db: float, n_sym_s: int) -> float:
    """Integrated SNR over ``n_sym_s`` symbols in closed form (no subcarrier count)."""
    return params._signal_term() * n_sym_s / (db_to_linear(2.0 * pl_db) * params._noise_term())


def detection_probability(gamma_sens: float, pfa: float, formula: str = "paper") -> float:
    """Nonfluctuating point-target detection probability.

    ``formula="paper"`` evaluates Q1(sqrt(gamma), sqrt(2 pfa)); ``"classical"``
    evaluates Q1(sqrt(2 gamma), sqrt(-2 ln pfa)).
    """
    if gamma_sens < 0:
        raise ValueError("SNR must be non-negative")
    if not 0 < pfa < 1:
        raise ValueError(f"pfa must lie in (0, 1), got {pfa}")
    if formula == "paper":
        return marcum_q1(math.sqrt(gamma_sens), math.sqrt(2.0 * pfa))
    if formula == "classical":
        return marcum_q1(math.sqrt(2.0 * gamma_sens), math.sqrt(-2.0 * math.log(pfa)))
    raise ValueError(f"unknown pd formula {formula!r}")


def required_snr(target: DetectionTarget, upper: float = 1e6, tol: float = 1e-12) -> float:
    """Smallest integrated SNR whose detection probability reaches the target.

    Returns 0.0 when the target is already met without any echo energy
    (possible with the ``paper`` form, whose floor is exp(-pfa)).
    """
    pd = lambda g: detection_probability(g, target.pfa, target.formula)
    if pd(0.0) >= target.pd_target:
        return 0.0
    if pd(upper) < target.pd_target:
        raise ValueError(
            f"pd target {target.pd_target} not reachable below SNR {upper:g} (pfa={target.pfa})"
        )
    lo, hi = 0.0, upper
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if pd(mid) >= target.pd_target:
            hi = mid
        else:
            lo = mid
    return hi


def min_sensing_symbols(params: RadarParams, target: DetectionTarget, pl_db: float,
                        symbols_per_cycle: int = 28, gamma_min: float | None = None) -> SymbolRequirement:
    """Fewest sensing symbols meeting the SNR requirement at path loss ``pl_db``.

    The count is never clamped; ``over_budget`` flags a requirement above
    ``symbols_per_cycle``. Pass ``gamma_min`` to skip the bisection.
    """
    if gamma_min is None:
        gamma_min = required_snr(target)
    per_symbol = sensing_snr(params, pl_db, 1)
    m = max(0, ceil_tol(gamma_min / per_symbol))
    return SymbolRequirement(m, m > symbols_per_cycle)
