"""Experiment configuration: defaults, TOML loading and validation.

A config file is TOML with one table per section (``[radio]``, ``[radar]``,
``[urllc]``, ``[traffic]``, ``[hall]``, ``[agv]``, ``[run]``) plus an
optional ``[[sectors]]`` array. Every key is optional; unknown keys are
rejected. See ``configs/default.toml`` for the annotated full set.
"""

from __future__ import annotations

import copy
import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .channel import Geometry, Scenario, SectorProfile
from .sensing import PD_FORMULAS, DetectionTarget, RadarParams
from .urllc import UrllcProfile


class ConfigError(ValueError):
    """Raised with every problem found, one per line."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.problems))


@dataclass
class RadioConfig:
    fc_ghz: float = 3.5
    bandwidth_hz: float = 100e6
    scs_hz: float = 30e3
    n_rb: int = 273
    cp_fraction: float = 0.0703
    symbols_per_cycle: int = 28
    cycle_length: float = 1e-3
    h_bs: float = 8.0
    h_ut: float = 1.5
    bs_position: list = field(default_factory=lambda: [100.0, 100.0])


@dataclass
class RadarConfig:
    tx_power_dbm: float = 30.0
    beamwidth_deg: float = 27.0
    rcs_dbsm: float = 7.0
    noise_figure_db: float = 9.0
    temp_k: float = 290.0
    pd_target: float = 0.9
    pfa: float = 1e-4
    pfa_sweep: list = field(default_factory=lambda: [1e-2, 1e-4, 1e-6])
    pd_formula: str = "paper"
    shadowing: bool = True


@dataclass
class UrllcConfig:
    n_users: int = 10
    packet_size_bits: int = 256
    bler: float = 1e-3
    reliability: float = 1e-5
    survival_time: float = 1e-3
    retx_limit: int = 3
    mcs_efficiency: float = 1.0
    symbols_per_tti: int = 2


@dataclass
class TrafficConfig:
    rate_min: float = 1000.0
    rate_max: float = 400000.0
    rate_step: float = 1000.0
    rates: list = field(default_factory=list)
    scope: str = "user"
    fixed_rate: float = -1.0
    resample_period: float = 1.0
    lambda_sweep: list = field(default_factory=lambda: [100000.0, 200000.0, 300000.0, 400000.0])

    def rate_set(self) -> list[float]:
        if self.rates:
            return [float(r) for r in self.rates]
        n = int(math.floor((self.rate_max - self.rate_min) / self.rate_step + 1e-9)) + 1
        return [self.rate_min + i * self.rate_step for i in range(n)]


def strip_sectors(width: float = 10.0, hall_width: float = 200.0, hall_height: float = 200.0,
                  densities=(0.2, 0.8)) -> list[dict]:
    """Vertical strips of equal width cycling through ``densities``.

    Sparse strips (density < 0.5) are high-BS sparse clutter with large,
    low machines; dense strips are high-BS dense clutter with small, tall
    ones. Neighbouring strips sit at similar distances from a central BS,
    so the clutter contrast is not masked by range.
    """
    n = int(round(hall_width / width))
    out = []
    for i in range(n):
        r = densities[i % len(densities)]
        dense = r >= 0.5
        out.append({
            "name": f"S{i}",
            "bounds": [width * i, 0.0, min(width * (i + 1), hall_width), hall_height],
            "clutter_density": r,
            "clutter_size": 2.0 if dense else 10.0,
            "clutter_height": 6.0 if dense else 2.0,
            "scenario": "DH" if dense else "SH",
        })
    return out


def default_sectors() -> list[dict]:
    return strip_sectors()


@dataclass
class HallConfig:
    width: float = 200.0
    height: float = 200.0
    track: list = field(default_factory=lambda: [[0.0, 130.0], [200.0, 130.0]])


@dataclass
class AgvConfig:
    speed: float = 4.0
    start: float = -1.0
    turn_period: float = 1.0


@dataclass
class RunConfig:
    horizon: float = 20.0
    seed: int = 1
    scheduler: str = "nbs"
    reschedule_period: int = 1


SECTIONS = {
    "radio": RadioConfig,
    "radar": RadarConfig,
    "urllc": UrllcConfig,
    "traffic": TrafficConfig,
    "hall": HallConfig,
    "agv": AgvConfig,
    "run": RunConfig,
}
SECTOR_KEYS = {"name", "bounds", "clutter_density", "clutter_size", "clutter_height", "scenario", "los_kind"}


@dataclass
class SimConfig:
    radio: RadioConfig = field(default_factory=RadioConfig)
    radar: RadarConfig = field(default_factory=RadarConfig)
    urllc: UrllcConfig = field(default_factory=UrllcConfig)
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    hall: HallConfig = field(default_factory=HallConfig)
    agv: AgvConfig = field(default_factory=AgvConfig)
    run: RunConfig = field(default_factory=RunConfig)
    sectors: list = field(default_factory=default_sectors)

    # derived model objects -------------------------------------------------

    @property
    def t_symbol(self) -> float:
        return (1.0 + self.radio.cp_fraction) / self.radio.scs_hz

    def radar_params(self) -> RadarParams:
        return RadarParams(
            tx_power_dbm=self.radar.tx_power_dbm,
            beamwidth_rad=math.radians(self.radar.beamwidth_deg),
            rcs_dbsm=self.radar.rcs_dbsm,
            fc_hz=self.radio.fc_ghz * 1e9,
            scs_hz=self.radio.scs_hz,
            n_sc_sens=12 * self.radio.n_rb,
            noise_figure_db=self.radar.noise_figure_db,
            temp_k=self.radar.temp_k,
            cp_fraction=self.radio.cp_fraction,
        )

    def detection_target(self, pfa: float | None = None) -> DetectionTarget:
        return DetectionTarget(self.radar.pd_target, self.radar.pfa if pfa is None else pfa,
                               self.radar.pd_formula)

    def urllc_profile(self) -> UrllcProfile:
        u = self.urllc
        return UrllcProfile(
            packet_size_bits=u.packet_size_bits, bler=u.bler, reliability=u.reliability,
            survival_time=u.survival_time, retx_limit=u.retx_limit, mcs_efficiency=u.mcs_efficiency,
            rb_bandwidth_hz=12 * self.radio.scs_hz, symbols_per_tti=u.symbols_per_tti,
            t_symbol=self.t_symbol, n_rb=self.radio.n_rb,
        )

    def geometry(self) -> Geometry:
        return Geometry(self.radio.h_bs, self.radio.h_ut)

    def sector_profiles(self) -> list[SectorProfile]:
        return [SectorProfile(**s) for s in self.sectors]

    # serialisation ------------------------------------------------------------

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]

    def replace(self, **dotted: Any) -> "SimConfig":
        """Copy with ``section__key=value`` overrides, e.g. ``run__seed=3``."""
        new = copy.deepcopy(self)
        for key, value in dotted.items():
            section, _, name = key.partition("__")
            if section == "sectors":
                new.sectors = copy.deepcopy(value)
                continue
            obj = getattr(new, section, None)
            if obj is None or not hasattr(obj, name):
                raise ConfigError([f"unknown config key {section}.{name}"])
            setattr(obj, name, value)
        validate(new)
        return new


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _coerce(section: str, name: str, default: Any, value: Any, problems: list[str]) -> Any:
    where = f"{section}.{name}"
    if isinstance(default, bool):
        if not isinstance(value, bool):
            problems.append(f"{where}: expected true/false, got {value!r}")
        return value
    if isinstance(default, int):
        if not isinstance(value, int) or isinstance(value, bool):
            problems.append(f"{where}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if not _is_number(value):
            problems.append(f"{where}: expected a number, got {value!r}")
            return value
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            problems.append(f"{where}: expected a string, got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list):
            problems.append(f"{where}: expected a list, got {value!r}")
        return value
    return value


def from_dict(data: dict) -> SimConfig:
    problems: list[str] = []
    cfg = SimConfig()
    for section, body in data.items():
        if section == "sectors":
            if not isinstance(body, list):
                problems.append("sectors: expected an array of tables")
                continue
            sectors = []
            for i, s in enumerate(body):
                extra = set(s) - SECTOR_KEYS
                if extra:
                    problems.append(f"sectors[{i}]: unknown keys {sorted(extra)}")
                sectors.append({k: v for k, v in s.items() if k in SECTOR_KEYS})
            cfg.sectors = sectors
            continue
        if section not in SECTIONS:
            problems.append(f"unknown section [{section}]")
            continue
        if not isinstance(body, dict):
            problems.append(f"[{section}] must be a table")
            continue
        obj = getattr(cfg, section)
        for name, value in body.items():
            if not hasattr(obj, name):
                problems.append(f"{section}.{name}: unknown key")
                continue
            setattr(obj, name, _coerce(section, name, getattr(obj, name), value, problems))
    if problems:
        raise ConfigError(problems)
    validate(cfg)
    return cfg


def parse_config(path: str | Path) -> SimConfig:
    """Load a TOML config; missing keys take their defaults."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read config file {path}: {exc.strerror or exc}"]) from exc
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"{path}: {exc}"]) from exc
    return from_dict(data)


def validate(cfg: SimConfig) -> None:
    """Check every field and raise one ConfigError listing all failures."""
    p: list[str] = []

    def positive(section, name):
        v = getattr(getattr(cfg, section), name)
        if not _is_number(v) or not v > 0:
            p.append(f"{section}.{name} must be positive, got {v!r}")

    def non_negative(section, name):
        v = getattr(getattr(cfg, section), name)
        if not _is_number(v) or v < 0:
            p.append(f"{section}.{name} must be non-negative, got {v!r}")

    def prob(section, name, lo_open=True):
        v = getattr(getattr(cfg, section), name)
        if not _is_number(v) or not (0 < v < 1 if lo_open else 0 <= v < 1):
            p.append(f"{section}.{name} must be a probability in {'(0, 1)' if lo_open else '[0, 1)'}, got {v!r}")

    for name in ("fc_ghz", "bandwidth_hz", "scs_hz", "n_rb", "symbols_per_cycle", "cycle_length", "h_bs", "h_ut"):
        positive("radio", name)
    non_negative("radio", "cp_fraction")
    r = cfg.radio
    if _is_number(r.h_bs) and _is_number(r.h_ut) and r.h_bs <= r.h_ut:
        p.append(f"radio.h_bs must exceed radio.h_ut ({r.h_bs} <= {r.h_ut})")
    if not (isinstance(r.bs_position, list) and len(r.bs_position) == 2 and all(map(_is_number, r.bs_position))):
        p.append(f"radio.bs_position must be [x, y], got {r.bs_position!r}")
    if isinstance(r.symbols_per_cycle, int) and r.symbols_per_cycle % 2:
        p.append("radio.symbols_per_cycle must be even")
    if all(_is_number(v) and v > 0 for v in (r.symbols_per_cycle, r.scs_hz, r.cycle_length)) \
            and _is_number(r.cp_fraction) and r.cp_fraction >= 0:
        if r.symbols_per_cycle * cfg.t_symbol > r.cycle_length + cfg.t_symbol:
            p.append("radio.symbols_per_cycle symbols do not fit in radio.cycle_length")

    for name in ("beamwidth_deg", "temp_k"):
        positive("radar", name)
    rd = cfg.radar
    if _is_number(rd.beamwidth_deg) and rd.beamwidth_deg > 360:
        p.append("radar.beamwidth_deg must not exceed 360")
    prob("radar", "pd_target")
    prob("radar", "pfa")
    if _is_number(rd.pfa) and _is_number(rd.pd_target) and rd.pfa >= rd.pd_target:
        p.append("radar.pfa must be below radar.pd_target")
    if not (isinstance(rd.pfa_sweep, list) and rd.pfa_sweep and all(_is_number(v) and 0 < v < 1 for v in rd.pfa_sweep)):
        p.append(f"radar.pfa_sweep must be a non-empty list of probabilities, got {rd.pfa_sweep!r}")
    if rd.pd_formula not in PD_FORMULAS:
        p.append(f"radar.pd_formula must be one of {PD_FORMULAS}, got {rd.pd_formula!r}")

    u = cfg.urllc
    for name in ("n_users", "packet_size_bits", "survival_time", "mcs_efficiency", "symbols_per_tti"):
        positive("urllc", name)
    prob("urllc", "bler", lo_open=False)
    prob("urllc", "reliability")
    non_negative("urllc", "retx_limit")

    t = cfg.traffic
    for name in ("rate_min", "rate_max", "rate_step", "resample_period"):
        positive("traffic", name)
    if _is_number(t.rate_min) and _is_number(t.rate_max) and t.rate_max < t.rate_min:
        p.append("traffic.rate_max must be >= traffic.rate_min")
    if not all(_is_number(v) and v >= 0 for v in t.rates):
        p.append("traffic.rates must be non-negative numbers")
    if t.scope not in ("user", "bs"):
        p.append(f"traffic.scope must be 'user' or 'bs', got {t.scope!r}")
    if not all(_is_number(v) and v > 0 for v in t.lambda_sweep):
        p.append("traffic.lambda_sweep must hold positive rates")

    h = cfg.hall
    positive("hall", "width")
    positive("hall", "height")
    positive("agv", "speed")
    positive("agv", "turn_period")
    non_negative("run", "horizon")
    if not isinstance(cfg.run.seed, int) or cfg.run.seed < 0:
        p.append(f"run.seed must be a non-negative integer, got {cfg.run.seed!r}")
    if cfg.run.scheduler not in ("nbs", "rr"):
        p.append(f"run.scheduler must be 'nbs' or 'rr', got {cfg.run.scheduler!r}")
    if not isinstance(cfg.run.reschedule_period, int) or cfg.run.reschedule_period < 1:
        p.append("run.reschedule_period must be an integer >= 1")

    if not (isinstance(h.track, list) and len(h.track) >= 2):
        p.append("hall.track must list at least two [x, y] points")
    elif _is_number(h.width) and _is_number(h.height):
        for pt in h.track:
            if not (isinstance(pt, list) and len(pt) == 2 and 0 <= pt[0] <= h.width and 0 <= pt[1] <= h.height):
                p.append(f"hall.track point {pt!r} lies outside the hall")

    profiles = []
    for i, s in enumerate(cfg.sectors):
        missing = {"bounds", "clutter_density", "clutter_size", "clutter_height"} - set(s)
        if missing:
            p.append(f"sectors[{i}]: missing keys {sorted(missing)}")
            continue
        try:
            prof = SectorProfile(**s)
        except (ValueError, TypeError) as exc:
            p.append(f"sectors[{i}]: {exc}")
            continue
        if prof.los_kind.high_bs and _is_number(r.h_ut) and prof.clutter_height <= r.h_ut:
            p.append(f"sectors[{i}]: clutter_height must exceed radio.h_ut for {prof.los_kind.value}")
        profiles.append(prof)
    if not cfg.sectors:
        p.append("at least one sector is required")
    elif len(profiles) == len(cfg.sectors) and _is_number(h.width) and _is_number(h.height):
        area = sum((b[2] - b[0]) * (b[3] - b[1]) for b in (q.bounds for q in profiles))
        if not math.isclose(area, h.width * h.height, rel_tol=1e-9):
            p.append(f"sectors cover {area:g} m^2 but the hall is {h.width * h.height:g} m^2")
        for a in range(len(profiles)):
            for b in range(a + 1, len(profiles)):
                A, B = profiles[a].bounds, profiles[b].bounds
                if A[0] < B[2] and B[0] < A[2] and A[1] < B[3] and B[1] < A[3]:
                    p.append(f"sectors[{a}] and sectors[{b}] overlap")
        for q in profiles:
            x0, y0, x1, y1 = q.bounds
            if x0 < 0 or y0 < 0 or x1 > h.width or y1 > h.height:
                p.append(f"sector {q.name or q.bounds} extends outside the hall")
    if p:
        raise ConfigError(p)


__all__ = ["SimConfig", "ConfigError", "parse_config", "from_dict", "validate", "Scenario"]
