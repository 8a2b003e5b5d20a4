"""Figure-level computations: transmission-delay PDF, bandwidth and region sweeps.

Each sweep point is independent; points are farmed out to a process pool when
``workers > 1`` and collected back in input order, so output is identical for
any worker count.
"""
from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import channel as chn
from . import delay
from .config import ConfigError, ExperimentConfig, sweep_values
from .geometry import InterferenceStats, interference_stats
from .numerics import Grid, TabulatedDist, l1_distance
from .simulator import empirical_dist, run_tandem, sample_tx_delays


def pool_map(fn, items, workers: int = 1) -> list:
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def rel_columns(deltas) -> list[str]:
    return [f"R@{d:g}" for d in deltas]


# ---------------------------------------------------------------------------
# transmission-delay density

@dataclass
class TxPdfResult:
    """``empirical``: histogram of Gaussian draws pushed through L / capacity(I)
    (draws with I <= -N0 count toward the total but land in no bin).
    ``simulated``: histogram of the tandem simulator's per-packet delays, whose
    Gaussian draws are clipped at zero."""

    analytic: TabulatedDist
    empirical: TabulatedDist
    simulated: TabulatedDist
    l1: float
    l1_simulated: float
    seconds: float
    n_packets: int

    def to_csv(self, path=None, header: dict | None = None) -> str:
        buf = io.StringIO()
        info = {"l1_distance": self.l1, "l1_distance_simulated": self.l1_simulated,
                "n_packets": self.n_packets, "h": repr(self.analytic.grid.h),
                "n_points": self.analytic.grid.n_points}
        info.update(header or {})
        for k, v in info.items():
            buf.write(f"# {k}: {v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "psi_T", "histogram", "histogram_simulated"])
        for row in zip(self.analytic.t, self.analytic.values, self.empirical.values, self.simulated.values):
            w.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def txpdf_grid(ch, stats: InterferenceStats, bins: int) -> Grid:
    """``bins`` histogram cells from 0 to the 7-sigma upper end of the delay support."""
    _, hi = delay.tx_support(ch, stats, k=7.0)
    return Grid.covering(hi, bins)


def _histogram(x: np.ndarray, grid: Grid) -> TabulatedDist:
    ok = np.isfinite(x)
    pdf, _ = empirical_dist(x[ok], grid)
    pdf.values *= ok.mean()
    return pdf


def txpdf(cfg: ExperimentConfig, stats: InterferenceStats | None = None, seed: int | None = None) -> TxPdfResult:
    """Analytic psi_T against per-packet transmission delays."""
    stats = stats or cfg.stats
    n = int(cfg.txpdf.get("n_packets", 100_000))
    bins = int(cfg.txpdf.get("bins", 200))
    seed = cfg.seed if seed is None else seed
    t0 = time.perf_counter()
    grid = txpdf_grid(cfg.channel, stats, bins)
    analytic = delay.tabulate_tx_delay(cfg.channel, stats, grid)
    emp = _histogram(sample_tx_delays(cfg.channel, stats, n, seed), grid)
    sim = run_tandem(cfg.sim_config(seed=seed, n_requests=n, warmup=0,
                                    interference_mode="gaussian", stats=stats))
    simulated = _histogram(sim.records["q2_service"], grid)
    return TxPdfResult(analytic, emp, simulated, l1_distance(analytic, emp),
                       l1_distance(analytic, simulated), time.perf_counter() - t0, n)


# ---------------------------------------------------------------------------
# bandwidth sweep

def _bandwidth_point(args):
    cfg, W = args
    ch = cfg.channel.with_(W=float(W))
    stats = interference_stats(cfg.deployment, ch.p, ch.A0)
    an = delay.e2e_analysis(cfg.queue, ch, stats, delta_max=max(cfg.deltas), n_points=cfg.grid_points)
    row = {"W": float(W), "rate_at_mean_I": float(chn.capacity(ch, stats.mu_I)), "rho": an.rho,
           "lost_mass": an.lost_mass, "mean_q1_delay": an.mean_q1_delay(),
           "mean_q2_wait": an.mean_q2_wait(), "mean_q2_delay": an.mean_q2_delay()}
    row.update(zip(rel_columns(cfg.deltas), map(float, an.reliability(cfg.deltas))))
    return row


def sweep_bandwidth(cfg: ExperimentConfig) -> list[dict]:
    Ws = sweep_values(cfg.sweep("bandwidth"))
    return pool_map(_bandwidth_point, [(cfg, W) for W in Ws], cfg.workers)


# ---------------------------------------------------------------------------
# region sweep

def _region_point(args):
    cfg, d0, omega = args
    ch = cfg.channel.with_(d0=float(d0))
    dep = replace(cfg.deployment, omega=float(omega))
    stats = interference_stats(dep, ch.p, ch.A0)
    an = delay.e2e_analysis(cfg.queue, ch, stats, delta_max=max(cfg.deltas), n_points=cfg.grid_points)
    row = {"d0": float(d0), "omega": float(omega), "lost_mass": an.lost_mass,
           "mean_q2_delay": an.mean_q2_delay()}
    row.update(zip(rel_columns(cfg.deltas), map(float, an.reliability(cfg.deltas))))
    return row


def sweep_region(cfg: ExperimentConfig) -> list[dict]:
    """Reliability over (d0, omega) with a finite-difference slope along omega."""
    sw = cfg.sweep("region")
    omegas = sweep_values(sw)
    bad = omegas[omegas <= cfg.deployment.r]
    if bad.size:
        raise ConfigError(f"sweeps.region: omega={bad[0]:g} does not exceed the hard-core distance r={cfg.deployment.r:g}")
    points = [(cfg, d0, om) for d0 in sw["d0"] for om in omegas]
    rows = pool_map(_region_point, points, cfg.workers)
    cols = rel_columns(cfg.deltas)
    for d0 in sw["d0"]:
        sub = [r for r in rows if r["d0"] == d0]
        for c in cols:
            y = np.array([r[c] for r in sub])
            slope = np.gradient(y, omegas) if len(omegas) > 1 else np.zeros(1)
            for r, s in zip(sub, slope):
                r[f"slope_{c}"] = float(s)
    return rows


def max_negative_slope(rows: list[dict], d0: float, column: str) -> float:
    """Steepest drop (as a positive number) of ``column`` along omega for one d0."""
    sub = sorted((r for r in rows if r["d0"] == d0), key=lambda r: r["omega"])
    y = np.array([r[column] for r in sub])
    x = np.array([r["omega"] for r in sub])
    if len(y) < 2:
        return 0.0
    return float(max(0.0, -np.min(np.diff(y) / np.diff(x))))


def write_rows(rows: list[dict], path, header: dict | None = None) -> str:
    buf = io.StringIO()
    for k, v in (header or {}).items():
        buf.write(f"# {k}: {v}\n")
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    text = buf.getvalue()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
