"""Run records, distribution summaries and CSV/JSON export.

Files written by :func:`export`:

``cycles.csv``
    one row per cycle: cycle, n_sym_s, n_sym_c, m_req_s, m_req_c, feasible,
    over_budget, pd, gamma_sens, detected, is_los, path_loss_db, sector,
    agv_distance, backlog, attempts.
``packets.csv``
    one row per packet: packet, user, arrival, completion, delay, attempts,
    status (done/failed/pending), violated. Times are seconds; missing
    completion/delay are empty fields.
``summary.json``
    :func:`summarize` output plus ``meta`` (seed, scheduler, config hash).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CYCLE_COLUMNS = [
    ("cycle", np.int64), ("n_sym_s", np.int64), ("n_sym_c", np.int64),
    ("m_req_s", np.int64), ("m_req_c", np.int64), ("feasible", bool), ("over_budget", bool),
    ("pd", float), ("gamma_sens", float), ("detected", bool), ("is_los", bool),
    ("path_loss_db", float), ("sector", np.int64), ("agv_distance", float),
    ("backlog", np.int64), ("attempts", np.int64),
]
PACKET_COLUMNS = ["packet", "user", "arrival", "completion", "delay", "attempts", "status", "violated"]
STATUS_NAMES = {0: "pending", 1: "done", 2: "failed"}
DECILES = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]


@dataclass
class DistributionSummary:
    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.sort(np.asarray(self.samples, dtype=float))
        if self.samples.size == 0:
            raise ValueError("cannot summarise an empty sample")

    def cdf(self, x):
        """Right-continuous ECDF: fraction of samples <= x."""
        return np.searchsorted(self.samples, x, side="right") / self.samples.size

    def quantile(self, q: float) -> float:
        """Smallest sample whose ECDF value is at least ``q``."""
        n = self.samples.size
        idx = max(0, math.ceil(q * n - 1e-9) - 1)
        return float(self.samples[min(idx, n - 1)])

    @property
    def p50(self):
        return self.quantile(0.5)

    @property
    def p90(self):
        return self.quantile(0.9)

    @property
    def p99(self):
        return self.quantile(0.99)

    @property
    def max(self):
        return float(self.samples[-1])

    def boxplot(self) -> dict:
        q1, med, q3 = self.quantile(0.25), self.quantile(0.5), self.quantile(0.75)
        iqr = q3 - q1
        lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
        inside = self.samples[(self.samples >= lo_fence) & (self.samples <= hi_fence)]
        return {
            "q1": q1, "median": med, "q3": q3,
            "whisker_low": float(inside[0]), "whisker_high": float(inside[-1]),
            "n_outliers": int(self.samples.size - inside.size),
        }


def ecdf(samples) -> DistributionSummary:
    return DistributionSummary(samples)


@dataclass
class MetricsReport:
    cycles: dict
    packets: dict
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_simulation(cls, sim) -> "MetricsReport":
        q = sim.queue
        n = q.size
        delay = q.completion[:n] - q.arrival[:n]
        status = q.status[:n].copy()
        survival = sim.cfg.urllc.survival_time
        packets = {
            "packet": np.arange(n),
            "user": q.user[:n].astype(np.int64),
            "arrival": q.arrival[:n].copy(),
            "completion": q.completion[:n].copy(),
            "delay": delay,
            "attempts": q.attempts[:n].astype(np.int64),
            "status": status,
            "violated": (status == 2) | (delay > survival),
        }
        meta = {
            "seed": sim.cfg.run.seed,
            "scheduler": sim.cfg.run.scheduler,
            "config_hash": sim.cfg.config_hash(),
            "pfa": sim.cfg.radar.pfa,
            "pd_formula": sim.cfg.radar.pd_formula,
            "horizon": sim.cfg.run.horizon,
            "survival_time": survival,
            "symbols_per_cycle": sim.cfg.radio.symbols_per_cycle,
            "sector_names": [s.name or f"S{i}" for i, s in enumerate(sim.hall.sectors)],
            "sector_density": [s.clutter_density for s in sim.hall.sectors],
        }
        return cls(dict(sim.records), packets, meta)

    @property
    def n_cycles(self) -> int:
        return len(self.cycles["cycle"])

    @property
    def n_packets(self) -> int:
        return len(self.packets["packet"])

    def delays(self) -> np.ndarray:
        d = self.packets["delay"]
        return d[self.packets["status"] == 1]

    def violation_rate(self) -> float:
        if self.n_packets == 0:
            return 0.0
        return float(np.mean(self.packets["violated"]))

    def mean_nsym_by_sector(self) -> dict:
        out = {}
        for k in np.unique(self.cycles["sector"]):
            sel = self.cycles["sector"] == k
            out[int(k)] = float(np.mean(self.cycles["n_sym_s"][sel]))
        return out


def _round(x, nd=12):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return None
    return float(f"{x:.{nd}g}")


def summarize(report: MetricsReport) -> dict:
    """Scalar summary of one run (delay, detection and allocation statistics)."""
    out: dict = {"n_cycles": report.n_cycles, "n_packets": report.n_packets}
    delays = report.delays()
    if delays.size:
        d = ecdf(delays)
        out["delay"] = {"p50": _round(d.p50), "p90": _round(d.p90), "p99": _round(d.p99),
                        "max": _round(d.max), "mean": _round(float(np.mean(delays))),
                        "box": {k: _round(v) for k, v in d.boxplot().items()}}
    else:
        out["delay"] = None
    status = report.packets["status"]
    out["n_done"] = int(np.sum(status == 1))
    out["n_failed"] = int(np.sum(status == 2))
    out["n_pending"] = int(np.sum(status == 0))
    out["violation_rate"] = _round(report.violation_rate())
    if report.n_cycles:
        c = report.cycles
        pd = ecdf(c["pd"])
        out["pd"] = {"mean": _round(float(np.mean(c["pd"]))),
                     "deciles": [_round(pd.quantile(q)) for q in DECILES],
                     "detection_rate": _round(float(np.mean(c["detected"])))}
        total = report.meta.get("symbols_per_cycle", int(c["n_sym_s"][0] + c["n_sym_c"][0]))
        out["n_sym_s_hist"] = {str(v): int(n) for v, n in zip(*np.unique(c["n_sym_s"], return_counts=True))}
        out["n_sym_c_hist"] = {str(v): int(n) for v, n in zip(*np.unique(c["n_sym_c"], return_counts=True))}
        out["mean_n_sym_s"] = _round(float(np.mean(c["n_sym_s"])))
        out["infeasible_cycles"] = int(np.sum(~c["feasible"].astype(bool)))
        out["mean_n_sym_s_by_sector"] = {str(k): _round(v) for k, v in report.mean_nsym_by_sector().items()}
        out["symbols_total"] = int(np.sum(c["n_sym_s"] + c["n_sym_c"]))
        out["symbols_expected"] = int(total * report.n_cycles)
    else:
        out["pd"] = None
    out["meta"] = report.meta
    return out


def _format_column(values, kind) -> list[str]:
    if kind is bool:
        return ["1" if v else "0" for v in values]
    if kind is float:
        return ["" if v != v else f"{v:.16e}" for v in values.tolist()]
    return [str(v) for v in np.asarray(values, dtype=np.int64).tolist()]


def _write_table(path: Path, header: list[str], columns: list[list[str]]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        fh.writelines(",".join(row) + "\n" for row in zip(*columns))


def write_cycles_csv(report: MetricsReport, path: Path) -> None:
    kinds = [(name, float if dt is float else bool if dt is bool else int) for name, dt in CYCLE_COLUMNS]
    cols = [_format_column(np.asarray(report.cycles[name]), k) for name, k in kinds]
    _write_table(path, [n for n, _ in kinds], cols)


def write_packets_csv(report: MetricsReport, path: Path) -> None:
    p = report.packets
    kinds = {"packet": int, "user": int, "arrival": float, "completion": float, "delay": float,
             "attempts": int, "violated": bool}
    cols = []
    for name in PACKET_COLUMNS:
        if name == "status":
            cols.append([STATUS_NAMES[v] for v in np.asarray(p[name]).tolist()])
        else:
            cols.append(_format_column(np.asarray(p[name]), kinds[name]))
    _write_table(path, PACKET_COLUMNS, cols)


def export(report: MetricsReport, out_dir) -> Path:
    """Write ``cycles.csv``, ``packets.csv`` and ``summary.json`` into ``out_dir``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_cycles_csv(report, out / "cycles.csv")
        write_packets_csv(report, out / "packets.csv")
        (out / "summary.json").write_text(json.dumps(summarize(report), indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write metrics to {out}: {exc}") from exc
    return out


def read_report(run_dir, meta: dict | None = None) -> MetricsReport:
    """Rebuild a report from exported CSVs (inverse of :func:`export`)."""
    run_dir = Path(run_dir)
    cycles = {name: [] for name, _ in CYCLE_COLUMNS}
    with open(run_dir / "cycles.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            for name, _ in CYCLE_COLUMNS:
                cycles[name].append(row[name])
    for name, dt in CYCLE_COLUMNS:
        if dt is float:
            cycles[name] = np.array([float(v) if v else np.nan for v in cycles[name]], dtype=float)
        elif dt is bool:
            cycles[name] = np.array([v == "1" for v in cycles[name]], dtype=bool)
        else:
            cycles[name] = np.array([int(v) for v in cycles[name]], dtype=np.int64)
    packets = {c: [] for c in PACKET_COLUMNS}
    codes = {v: k for k, v in STATUS_NAMES.items()}
    with open(run_dir / "packets.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            for c in PACKET_COLUMNS:
                packets[c].append(row[c])
    for c in ("packet", "user", "attempts"):
        packets[c] = np.array([int(v) for v in packets[c]], dtype=np.int64)
    for c in ("arrival", "completion", "delay"):
        packets[c] = np.array([float(v) if v else np.nan for v in packets[c]], dtype=float)
    packets["status"] = np.array([codes[v] for v in packets["status"]], dtype=np.int8)
    packets["violated"] = np.array([v == "1" for v in packets["violated"]], dtype=bool)
    if meta is None:
        meta = json.loads((run_dir / "summary.json").read_text())["meta"]
    return MetricsReport(cycles, packets, meta)
