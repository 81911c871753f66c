"""3GPP TR 38.901 indoor-factory (InF) propagation: path loss, LoS probability
and log-normal shadow fading for high-BS sparse/dense clutter."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

SIGMA_LOS_DB = 4.3
SIGMA_NLOS_DB = {"SH": 5.9, "DH": 4.0}


class Scenario(str, Enum):
    SL = "SL"
    DL = "DL"
    SH = "SH"
    DH = "DH"

    @property
    def high_bs(self) -> bool:
        return self in (Scenario.SH, Scenario.DH)


@dataclass(frozen=True)
class SectorProfile:
    """One rectangular region of the hall with homogeneous clutter.

    ``scenario`` selects the NLoS path-loss law (SH or DH only) while
    ``los_kind`` selects the r_sec branch; it defaults to ``scenario``.
    Bounds are ``(x_min, y_min, x_max, y_max)`` in meters.
    """

    clutter_density: float
    clutter_size: float
    clutter_height: float
    scenario: Scenario = Scenario.DH
    bounds: tuple[float, float, float, float] = (0.0, 0.0, 200.0, 200.0)
    los_kind: Scenario | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        kind = self.scenario if self.los_kind is None else Scenario(self.los_kind)
        object.__setattr__(self, "los_kind", kind)
        object.__setattr__(self, "bounds", tuple(float(b) for b in self.bounds))
        if not self.scenario.high_bs:
            raise ValueError(f"NLoS path loss is only modelled for SH/DH, got {self.scenario.value}")
        if not 0.0 < self.clutter_density < 1.0:
            raise ValueError(f"clutter density must lie in (0, 1), got {self.clutter_density}")
        if self.clutter_size <= 0:
            raise ValueError(f"clutter size must be positive, got {self.clutter_size}")
        x0, y0, x1, y1 = self.bounds
        if not (x1 > x0 and y1 > y0):
            raise ValueError(f"degenerate sector bounds {self.bounds}")

    def contains(self, x: float, y: float) -> bool:
        # half-open so that tiling sectors never both claim a shared edge
        x0, y0, x1, y1 = self.bounds
        return x0 <= x < x1 and y0 <= y < y1


@dataclass(frozen=True)
class Geometry:
    h_bs: float = 8.0
    h_ut: float = 1.5

    def __post_init__(self):
        if not self.h_bs > self.h_ut > 0:
            raise ValueError(f"need h_bs > h_ut > 0, got h_bs={self.h_bs}, h_ut={self.h_ut}")

    def distances(self, bs_xy, ut_xy) -> tuple[float, float]:
        """Return ``(d_2d, d_3d)`` between a BS and a terminal in meters."""
        d2d = math.hypot(ut_xy[0] - bs_xy[0], ut_xy[1] - bs_xy[1])
        return d2d, math.hypot(d2d, self.h_bs - self.h_ut)


@dataclass(frozen=True)
class LinkState:
    is_los: bool
    path_loss_db: float
    shadow_db: float

    @property
    def total_db(self) -> float:
        return self.path_loss_db + self.shadow_db


def _check_args(fc_ghz: float, d3d: float) -> None:
    if fc_ghz <= 0:
        raise ValueError(f"carrier frequency must be positive, got {fc_ghz} GHz")
    if d3d < 1.0:
        raise ValueError(f"d_3d={d3d} m is below the 1 m validity floor of the model")


def path_loss_los(fc_ghz: float, d3d: float) -> float:
    _check_args(fc_ghz, d3d)
    return 31.84 + 21.50 * math.log10(d3d) + 19.00 * math.log10(fc_ghz)


def path_loss_nlos(scenario: Scenario | str, fc_ghz: float, d3d: float) -> float:
    scenario = Scenario(scenario)
    _check_args(fc_ghz, d3d)
    if scenario is Scenario.SH:
        pl = 32.4 + 23.0 * math.log10(d3d) + 20.0 * math.log10(fc_ghz)
    elif scenario is Scenario.DH:
        pl = 33.63 + 21.9 * math.log10(d3d) + 20.0 * math.log10(fc_ghz)
    else:
        raise ValueError(f"no NLoS path-loss law for scenario {scenario.value}")
    return max(pl, path_loss_los(fc_ghz, d3d))


def r_sec(profile: SectorProfile, geom: Geometry) -> float:
    """Decay distance of the LoS probability in meters."""
    r = profile.clutter_density
    if not 0.0 < r < 1.0:
        raise ValueError(f"clutter density must lie in (0, 1), got {r}")
    # TR 38.901 sign convention; ln(1 - r) < 0 so this is positive
    base = -profile.clutter_size / math.log1p(-r)
    if not profile.los_kind.high_bs:
        return base
    if profile.clutter_height <= geom.h_ut:
        raise ValueError(
            f"clutter height {profile.clutter_height} m must exceed h_ut={geom.h_ut} m for SH/DH"
        )
    return base * (geom.h_bs - geom.h_ut) / (profile.clutter_height - geom.h_ut)


def los_probability(d2d: float, rsec: float) -> float:
    if d2d < 0 or rsec <= 0:
        raise ValueError(f"need d2d >= 0 and r_sec > 0, got d2d={d2d}, r_sec={rsec}")
    return math.exp(-d2d / rsec)


def shadow_sigma_db(is_los: bool, scenario: Scenario | str) -> float:
    return SIGMA_LOS_DB if is_los else SIGMA_NLOS_DB[Scenario(scenario).value]


def expected_path_loss(profile: SectorProfile, geom: Geometry, fc_ghz: float,
                       d2d: float, d3d: float) -> float:
    """Shadow-free path loss averaged (in dB) over the LoS/NLoS condition."""
    p = los_probability(d2d, r_sec(profile, geom))
    return p * path_loss_los(fc_ghz, d3d) + (1.0 - p) * path_loss_nlos(profile.scenario, fc_ghz, d3d)


def sample_link_state(rng: np.random.Generator, profile: SectorProfile, geom: Geometry,
                      fc_ghz: float, d2d: float, d3d: float | None = None,
                      shadowing: bool = True) -> LinkState:
    """Draw the LoS condition and the shadow-fading term for one link.

    Exactly two variates are consumed per call whatever the outcome, so
    callers sharing a stream stay aligned.
    """
    if d3d is None:
        d3d = math.hypot(d2d, geom.h_bs - geom.h_ut)
    u, z = rng.random(), rng.standard_normal()
    is_los = bool(u < los_probability(d2d, r_sec(profile, geom)))
    if is_los:
        pl = path_loss_los(fc_ghz, d3d)
    else:
        pl = path_loss_nlos(profile.scenario, fc_ghz, d3d)
    shadow = shadow_sigma_db(is_los, profile.scenario) * z if shadowing else 0.0
    return LinkState(is_los=is_los, path_loss_db=pl, shadow_db=shadow)
