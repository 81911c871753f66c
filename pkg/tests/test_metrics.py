import csv
import json

import numpy as np
import pytest

from isacsim import SimConfig, run_simulation
from isacsim.metrics import (CYCLE_COLUMNS, PACKET_COLUMNS, MetricsReport, ecdf, export, read_report,
                             summarize)
from isacsim.sensing import detection_probability


def test_ecdf_definition():
    e = ecdf([1, 2, 3])
    assert e.cdf(2) == pytest.approx(2 / 3)
    assert e.cdf(0.5) == 0 and e.cdf(3) == 1
    assert ecdf([1, 2, 3, 4]).p50 == 2
    assert ecdf([4, 1, 3, 2]).max == 4
    with pytest.raises(ValueError):
        ecdf([])


def test_ecdf_uniform_dkw():
    x = np.random.default_rng(0).random(10_000)
    e = ecdf(x)
    grid = np.linspace(0, 1, 2001)
    assert np.max(np.abs(e.cdf(grid) - grid)) < 0.02


def test_quantiles_monotone_and_boxplot():
    x = np.random.default_rng(1).standard_normal(999)
    e = ecdf(x)
    qs = [e.quantile(q) for q in np.linspace(0.01, 1, 100)]
    assert all(b >= a for a, b in zip(qs, qs[1:]))
    box = ecdf(np.r_[np.arange(10.0), 100.0]).boxplot()
    assert box["n_outliers"] == 1 and box["whisker_high"] == 9.0 and box["median"] == 5.0


@pytest.fixture(scope="module")
def run():
    cfg = SimConfig().replace(run__horizon=0.2, radar__rcs_dbsm=-45.0, radar__pd_formula="classical")
    return cfg, run_simulation(cfg)


def test_summary_contents(run):
    cfg, r = run
    s = summarize(r)
    assert s["n_cycles"] == 200
    assert s["symbols_total"] == s["symbols_expected"] == 200 * 28
    assert set(s["delay"]) >= {"p50", "p90", "p99", "max", "box"}
    assert len(s["pd"]["deciles"]) == 9
    assert sum(s["n_sym_s_hist"].values()) == 200
    assert s["meta"]["config_hash"] == cfg.config_hash()


def test_rr_histogram_point_mass():
    r = run_simulation(SimConfig().replace(run__horizon=0.1, run__scheduler="rr"))
    assert summarize(r)["n_sym_s_hist"] == {"14": 100}


def test_violation_rate_zero_when_all_fast():
    r = run_simulation(SimConfig().replace(run__horizon=0.1, traffic__fixed_rate=2000.0, urllc__bler=0.0))
    assert r.violation_rate() == 0.0


def test_export_round_trip_and_bytes(run, tmp_path):
    cfg, r = run
    a = export(r, tmp_path / "a")
    b = export(run_simulation(cfg), tmp_path / "b")
    for name in ("cycles.csv", "packets.csv", "summary.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    back = read_report(a)
    assert json.dumps(summarize(back), sort_keys=True) == json.dumps(summarize(r), sort_keys=True)


def test_export_schema_and_recomputations(run, tmp_path):
    cfg, r = run
    out = export(r, tmp_path / "x")
    with open(out / "cycles.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == [n for n, _ in CYCLE_COLUMNS]
    for row in rows:
        assert int(row["n_sym_s"]) + int(row["n_sym_c"]) == 28
        pd = detection_probability(float(row["gamma_sens"]), cfg.radar.pfa, "classical")
        assert abs(pd - float(row["pd"])) <= 1e-12
    with open(out / "packets.csv") as fh:
        pk = list(csv.DictReader(fh))
    assert list(pk[0]) == PACKET_COLUMNS
    late = sum(1 for p in pk if p["status"] == "failed" or (p["delay"] and float(p["delay"]) > 1e-3))
    assert late / len(pk) == pytest.approx(r.violation_rate())
    for p in pk:
        assert (p["violated"] == "1") == (p["status"] == "failed" or (p["delay"] != "" and float(p["delay"]) > 1e-3))


def test_empty_report_export(tmp_path):
    r = run_simulation(SimConfig().replace(run__horizon=0.0))
    out = export(r, tmp_path / "empty")
    assert (out / "cycles.csv").read_text().strip() == ",".join(n for n, _ in CYCLE_COLUMNS)
    assert (out / "packets.csv").read_text().strip() == ",".join(PACKET_COLUMNS)
    s = json.loads((out / "summary.json").read_text())
    assert s["n_cycles"] == 0 and s["delay"] is None and s["pd"] is None


def test_export_error_names_path(run, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match="file"):
        export(run[1], blocker / "sub")
