"""Smallest end-to-end use of the library.

Runs one second of the default factory hall under the bargaining scheduler,
prints a few headline numbers and writes the CSV/JSON records to ./runs/quickstart.

    python3 demos/quickstart.py
"""

from pathlib import Path

from isacsim import SimConfig, export, run_simulation, summarize

cfg = SimConfig().replace(run__horizon=1.0, run__scheduler="nbs", run__seed=1)
report = run_simulation(cfg)
s = summarize(report)

print(f"config hash      {cfg.config_hash()}")
print(f"cycles / packets {s['n_cycles']} / {s['n_packets']}")
print(f"delay p50 / p99  {s['delay']['p50'] * 1e3:.3f} ms / {s['delay']['p99'] * 1e3:.3f} ms")
print(f"violation rate   {s['violation_rate']:.2e}")
print(f"mean Pd          {s['pd']['mean']:.6f}")
print(f"sensing symbols  {s['n_sym_s_hist']}")

out = export(report, Path("runs") / "quickstart")
print(f"records written to {out}/")
