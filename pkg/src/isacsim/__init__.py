"""Discrete-time simulator for joint sensing and URLLC scheduling in a factory hall.

A base station splits each 1 ms cycle of 28 OFDM symbols between radar
sensing of a moving AGV and URLLC packet delivery, using either a Nash
bargaining split or a fixed round-robin split.
"""

from .config import ConfigError, SimConfig, parse_config
from .metrics import MetricsReport, ecdf, export, summarize
from .scheduler import DisagreementPoints, nbs_allocate, nbs_oracle, round_robin_allocate
from .sim import Simulation, run_simulation

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "SimConfig", "parse_config",
    "MetricsReport", "ecdf", "export", "summarize",
    "DisagreementPoints", "nbs_allocate", "nbs_oracle", "round_robin_allocate",
    "Simulation", "run_simulation",
]
