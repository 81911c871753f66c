"""Command-line entry point: single runs and paired sweeps.

Output layout (a pure function of the flags, the config hash and the seed)::

    <out>/<config-hash>/<arm>/<scheduler>-seed<N>/
        cycles.csv  packets.csv  summary.json  config.json

``<config-hash>`` is the hash of the configuration after the global flags
(``--duration``, ``--pd-formula``, ``--fixed-lambda``, ``--scheduler``) are
applied; ``<arm>`` names the sweep point (``base`` for a plain run). Each run
is written to a temporary directory that is renamed into place only once
complete, so a failed run leaves nothing behind.

``--out`` defaults to ``$ISACSIM_OUT`` and then to ``./runs``.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import shutil
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .config import ConfigError, SimConfig, parse_config
from .metrics import export, summarize
from .sim import run_simulation

OUT_ENV = "ISACSIM_OUT"
SWEEP_KINDS = ("pfa", "lambda", "scheduler")


@dataclass
class SweepSpec:
    """Sweep points crossed with a seed list; every point sees the same seeds."""

    arms: list = field(default_factory=lambda: [("base", {})])
    seeds: list = field(default_factory=lambda: [1])

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("seed list is empty")
        if not self.arms:
            raise ValueError("no sweep arms")

    def runs(self):
        for (label, overrides), seed in itertools.product(self.arms, self.seeds):
            yield label, overrides, seed


def _pfa_label(p: float) -> str:
    return f"pfa={p:.0e}"


def build_sweep(cfg: SimConfig, kinds, seeds, fixed_lambda: bool = False) -> SweepSpec:
    """Cartesian product of the requested sweep dimensions."""
    dims = []
    for kind in dict.fromkeys(kinds):
        if kind == "pfa":
            dims.append([(_pfa_label(p), {"radar__pfa": float(p)}) for p in cfg.radar.pfa_sweep])
        elif kind == "lambda":
            if fixed_lambda:
                dims.append([(f"lambda={lam:g}", {"traffic__fixed_rate": float(lam)})
                             for lam in cfg.traffic.lambda_sweep])
            else:
                # per-second resampling from the rate set truncated at lambda
                dims.append([(f"lambda<={lam:g}", {"traffic__rate_max": float(lam)})
                             for lam in cfg.traffic.lambda_sweep])
        elif kind == "scheduler":
            dims.append([("", {"run__scheduler": s}) for s in ("nbs", "rr")])
        else:
            raise ValueError(f"unknown sweep {kind!r}")
    arms = []
    for combo in itertools.product(*dims):
        label = "_".join(lbl for lbl, _ in combo if lbl) or "base"
        overrides = {}
        for _, o in combo:
            overrides.update(o)
        arms.append((label, overrides))
    return SweepSpec(arms or [("base", {})], list(seeds))


def run_dir_for(out: Path, base_hash: str, label: str, cfg: SimConfig) -> Path:
    return out / base_hash / label / f"{cfg.run.scheduler}-seed{cfg.run.seed}"


def _execute(job) -> dict:
    cfg, target = job
    target = Path(target)
    tmp = target.with_name(f".{target.name}.tmp-{os.getpid()}")
    if tmp.exists():
        shutil.rmtree(tmp)
    t0 = time.perf_counter()
    try:
        report = run_simulation(cfg)
        export(report, tmp)
        (tmp / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
        if target.exists():
            shutil.rmtree(target)
        os.replace(tmp, target)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    s = summarize(report)
    return {
        "path": str(target),
        "scheduler": cfg.run.scheduler,
        "seed": cfg.run.seed,
        "p99_delay": s["delay"]["p99"] if s["delay"] else None,
        "violation_rate": s["violation_rate"],
        "mean_pd": s["pd"]["mean"] if s["pd"] else None,
        "mean_n_sym_s": s.get("mean_n_sym_s"),
        "seconds": round(time.perf_counter() - t0, 3),
    }


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="isacsim",
        description="ISAC scheduling simulator: URLLC delay and AGV detection under NBS or round-robin splits.",
    )
    ap.add_argument("--config", type=Path, help="TOML config file (defaults apply to missing keys)")
    ap.add_argument("--scheduler", choices=("nbs", "rr"), help="allocation policy (default from config)")
    ap.add_argument("--seed", type=int, help="master seed (default from config)")
    ap.add_argument("--replicates", type=int, default=1, metavar="K",
                    help="run seeds seed..seed+K-1 for every sweep point")
    ap.add_argument("--duration", type=float, metavar="SECONDS", help="simulated horizon")
    ap.add_argument("--out", type=Path, help=f"output root (default ${OUT_ENV} or ./runs)")
    ap.add_argument("--sweep", action="append", choices=SWEEP_KINDS, default=[],
                    help="sweep dimension; repeat to cross dimensions")
    ap.add_argument("--pd-formula", choices=("paper", "classical"), help="detection-probability form")
    ap.add_argument("--fixed-lambda", nargs="?", const=True, default=None, metavar="RATE",
                    help="pin the cumulative packet rate; bare flag pins each --sweep lambda point")
    ap.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    return ap


def _base_config(args) -> SimConfig:
    cfg = parse_config(args.config) if args.config is not None else SimConfig()
    over = {}
    if args.duration is not None:
        over["run__horizon"] = float(args.duration)
    if args.pd_formula is not None:
        over["radar__pd_formula"] = args.pd_formula
    if args.scheduler is not None:
        over["run__scheduler"] = args.scheduler
    if args.seed is not None:
        over["run__seed"] = args.seed
    if args.fixed_lambda not in (None, True):
        try:
            over["traffic__fixed_rate"] = float(args.fixed_lambda)
        except ValueError:
            raise ConfigError([f"--fixed-lambda expects a rate, got {args.fixed_lambda!r}"]) from None
    return cfg.replace(**over) if over else cfg


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        if args.replicates < 1 or args.jobs < 1:
            raise ConfigError(["--replicates and --jobs must be >= 1"])
        cfg = _base_config(args)
        out = args.out if args.out is not None else Path(os.environ.get(OUT_ENV, "runs"))
        base_hash = cfg.config_hash()
        seeds = [cfg.run.seed + k for k in range(args.replicates)]
        spec = build_sweep(cfg, args.sweep, seeds, fixed_lambda=args.fixed_lambda is True)
        jobs = []
        for label, overrides, seed in spec.runs():
            run_cfg = cfg.replace(run__seed=seed, **overrides)
            target = run_dir_for(out, base_hash, label, run_cfg)
            target.parent.mkdir(parents=True, exist_ok=True)
            jobs.append((run_cfg, target))
    except ConfigError as exc:
        print(f"isacsim: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"isacsim: {exc}", file=sys.stderr)
        return 1

    try:
        if args.jobs > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(_execute, jobs))
        else:
            results = [_execute(j) for j in jobs]
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"isacsim: run failed: {exc}", file=sys.stderr)
        return 1

    index = out / base_hash / "runs.json"
    index.write_text(json.dumps(results, indent=2, sort_keys=True) + "\n")
    for r in results:
        p99 = "n/a" if r["p99_delay"] is None else f"{r['p99_delay'] * 1e3:.3f} ms"
        print(f"{r['path']}: p99 delay {p99}, violation rate {r['violation_rate']:.3g}, mean Pd {r['mean_pd']:.6f}")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
