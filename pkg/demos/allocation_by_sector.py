"""How the sensing share follows clutter.

The round-robin split is a point mass at 14 sensing symbols. The bargaining
split hands out the symbols left over after both minimum requirements evenly,
so the sensing share rises in dense clutter (more symbols needed to hold
Pd) and falls when the URLLC backlog grows.

    python3 demos/allocation_by_sector.py
"""

from pathlib import Path

import numpy as np

from isacsim import parse_config, run_simulation

cfg = parse_config(Path(__file__).resolve().parents[1] / "configs" / "sensing_limited.toml")

for sched in ("rr", "nbs"):
    rep = run_simulation(cfg.replace(run__scheduler=sched))
    c = rep.cycles
    vals, counts = np.unique(c["n_sym_s"], return_counts=True)
    hist = ", ".join(f"{v}:{n / rep.n_cycles:.3f}" for v, n in zip(vals, counts))
    print(f"{sched}: n_s histogram {{{hist}}}")
    if sched == "nbs":
        names, dens = rep.meta["sector_names"], rep.meta["sector_density"]
        for k, mean in sorted(rep.mean_nsym_by_sector().items()):
            share = np.mean(c["sector"] == k)
            print(f"   {names[k]:>4} density {dens[k]:.1f}: mean n_s {mean:5.2f} over {share:6.1%} of cycles")
