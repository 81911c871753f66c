"""URLLC delay tail: bargaining split vs the fixed half/half split.

Both arms share a seed, so they see the same arrivals, AGV path and channel
draws; only the symbol split differs. The fixed split caps the communication
window at 14 symbols, which falls short whenever the offered load peaks, and
the queue then drains over hundreds of milliseconds.

    python3 demos/delay_tail.py [seconds] [seed]
"""

import sys

import numpy as np

from isacsim import SimConfig, ecdf, run_simulation

horizon = float(sys.argv[1]) if len(sys.argv) > 1 else 5.0
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 1
base = SimConfig().replace(run__horizon=horizon, run__seed=seed)

probes = [0.5, 0.9, 0.99, 0.999]
print(f"{'scheduler':>9} " + " ".join(f"{'p' + format(q * 100, 'g'):>10}" for q in probes)
      + f" {'max':>10} {'viol.':>9}")
for sched in ("nbs", "rr"):
    rep = run_simulation(base.replace(run__scheduler=sched))
    d = ecdf(rep.delays())
    row = " ".join(f"{d.quantile(q) * 1e3:8.3f}ms" for q in probes)
    print(f"{sched:>9} {row} {d.max * 1e3:8.1f}ms {rep.violation_rate():9.2e}")

# survival time 1 ms: the delay budget the tail should respect
print(f"\nsurvival time {base.urllc.survival_time * 1e3:g} ms;"
      f" mean offered load {np.mean(base.traffic.rate_set()) / 1e3:.0f}k pkt/s")
