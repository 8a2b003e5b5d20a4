"""Command-line runner: ``thzvr {txpdf,sweep-bandwidth,sweep-region,simulate,validate}``.

Exit codes: 0 success, 1 validation failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import acceptance, config, delay, experiments
from .config import ConfigError
from .simulator import DivergenceError, SimResult, merge_summaries, run_tandem

log = logging.getLogger("thzvr")

# preset used when no --config is given
DEFAULT_PRESET = {"txpdf": "validation", "sweep-bandwidth": "fig3", "sweep-region": "fig4",
                  "simulate": "validation", "validate": "validation"}


def _outdir(cfg) -> Path:
    p = Path(cfg.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def cmd_txpdf(cfg, args) -> int:
    stats = cfg.stats.scaled(sigma_factor=args.sigma_scale)
    res = experiments.txpdf(cfg, stats=stats)
    path = _outdir(cfg) / "txpdf.csv"
    res.to_csv(path, {**cfg.provenance(), "mu_I": stats.mu_I, "sigma_I": stats.sigma_I,
                      "sigma_scale": args.sigma_scale})
    print(f"l1_distance: {res.l1:.6g}\nl1_distance_simulated: {res.l1_simulated:.6g}\nruntime_s: {res.seconds:.3f}\noutput: {path}")
    return 0


def cmd_sweep_bandwidth(cfg, args) -> int:
    rows = experiments.sweep_bandwidth(cfg)
    path = _outdir(cfg) / "sweep_bandwidth.csv"
    experiments.write_rows(rows, path, cfg.provenance())
    print(f"rows: {len(rows)}\noutput: {path}")
    if acceptance.HEADLINE_DELTA in cfg.deltas:
        for k, v in acceptance.headline_numbers(rows).items():
            print(f"{k}: {v:.6g}")
    return 0


def cmd_sweep_region(cfg, args) -> int:
    rows = experiments.sweep_region(cfg)
    path = _outdir(cfg) / "sweep_region.csv"
    experiments.write_rows(rows, path, cfg.provenance())
    print(f"rows: {len(rows)}\noutput: {path}")
    return 0


def _replicate(sim_cfg) -> SimResult:
    return run_tandem(sim_cfg)


def cmd_simulate(cfg, args) -> int:
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.replications)
    seeds = [int(c.generate_state(1)[0]) for c in children] if cfg.replications > 1 else [cfg.seed]
    results = experiments.pool_map(_replicate, [cfg.sim_config(seed=s) for s in seeds], cfg.workers)
    out = _outdir(cfg)
    for k, res in enumerate(results):
        res.to_csv(out / f"requests_rep{k}.csv")
    summary = merge_summaries(results)
    if cfg.sim.get("interference_mode", "gaussian") == "gaussian":
        an = delay.e2e_analysis(cfg.queue, cfg.channel, cfg.stats, delta_max=max(cfg.deltas),
                                n_points=cfg.grid_points)
        for d in cfg.deltas:
            summary[f"analytic_reliability@{d:g}"] = float(an.reliability(d))
    lines = [f"{k}: {v}" for k, v in cfg.provenance().items()]
    lines += [f"replication_seeds: {seeds}"] + [f"{k}: {v}" for k, v in summary.items()]
    text = "\n".join(lines) + "\n"
    (out / "summary.txt").write_text(text)
    print(text, end="")
    return 0


def cmd_validate(cfg, args) -> int:
    only = set(args.only) if args.only else None
    results = acceptance.run_all(seed=args.seed, only=only)
    out = _outdir(cfg)
    with open(out / "validation.jsonl", "w") as fh:
        for c in results:
            fh.write(c.to_json() + "\n")
    for c in results:
        print(c.line())
    failed = [c.number for c in results if not c.passed]
    print(f"summary: {len(results) - len(failed)}/{len(results)} passed"
          + (f"; failed: {failed}" if failed else ""))
    return 1 if failed else 0


COMMANDS = {"txpdf": cmd_txpdf, "sweep-bandwidth": cmd_sweep_bandwidth, "sweep-region": cmd_sweep_region,
            "simulate": cmd_simulate, "validate": cmd_validate}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML config (may name a preset); default: the command's preset")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--grid-points", type=int, dest="grid_points")
    common.add_argument("--replications", type=int)
    common.add_argument("--workers", type=int, help="process pool size for sweep points and replications")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="thzvr", description="THz VR end-to-end delay reliability experiments")
    sub = p.add_subparsers(dest="command", required=True)
    tx = sub.add_parser("txpdf", parents=[common], help="analytic vs simulated transmission-delay PDF")
    tx.add_argument("--sigma-scale", type=float, default=1.0, help="multiply the interference std by this")
    sub.add_parser("sweep-bandwidth", parents=[common], help="reliability and mean delays vs bandwidth")
    sub.add_parser("sweep-region", parents=[common], help="reliability vs interference radius for each d0")
    sub.add_parser("simulate", parents=[common], help="discrete-event simulation of the tandem")
    va = sub.add_parser("validate", parents=[common], help="run the acceptance criteria")
    va.add_argument("--only", type=int, nargs="+", metavar="N", help="criterion numbers to run")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: getattr(args, k) for k in ("seed", "out", "grid_points", "replications", "workers")}
    try:
        cfg = config.load(args.config, overrides, default_preset=DEFAULT_PRESET[args.command])
        log.info("resolved config: %s", cfg.provenance())
        return COMMANDS[args.command](cfg, args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (delay.StabilityError, delay.GridCoverageError, DivergenceError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
