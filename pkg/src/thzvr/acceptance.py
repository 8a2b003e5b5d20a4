"""Acceptance criteria, each returning measured values next to its fixed limits.

Used by ``thzvr validate`` and by tests/test_acceptance.py.  Limits are
constants here on purpose: changing one is a visible diff.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy import differentiate

from . import channel as chn
from . import config, delay, experiments
from .geometry import campbell_moments, exact_interference, interference_stats, interferer_distances, sample_mhcpp
from .numerics import Grid, ks_against_samples
from .simulator import run_tandem

# limits
TXPDF_L1 = 0.05
TXPDF_SECONDS = 60.0
ZETA_REL = 1e-5
NORMALIZATION_ABS = 1e-3
MM1_ABS = 1e-3
E2E_KS = 0.02
E2E_REL_ABS = 0.005
MONOTONE_TOL = 1e-9
HEADLINE_W, HEADLINE_W_TOL = 10e9, 2e9
HEADLINE_RATE, HEADLINE_RATE_REL = 16.4e9, 0.10
HEADLINE_SAT, HEADLINE_SAT_TOL = 13e9, 3e9
HEADLINE_TARGET, HEADLINE_DELTA, SAT_DELTA = 0.99999, 0.030, 0.010
GEOMETRY_DEPLOYMENTS = 10_000
GEOMETRY_MEAN_REL, GEOMETRY_VAR_REL = 0.10, 0.25
CONVERGENCE_ABS = 1e-4


@dataclass
class Criterion:
    number: int
    name: str
    passed: bool
    measured: dict
    limits: dict
    seconds: float = 0.0
    notes: str = ""

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        meas = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        lim = ", ".join(f"{k}={_fmt(v)}" for k, v in self.limits.items())
        return f"criterion {self.number} {verdict} {self.name}: {meas} | limits: {lim}"

    def to_json(self) -> str:
        return json.dumps(asdict(self), default=_jsonable, sort_keys=True)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.bool_):
        return bool(v)
    return str(v)


def _timed(fn):
    def run(*a, **kw):
        t0 = time.perf_counter()
        c = fn(*a, **kw)
        c.seconds = time.perf_counter() - t0
        return c
    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


# ---------------------------------------------------------------------------

@_timed
def txpdf_matches_simulation(seed: int | None = None) -> Criterion:
    """Analytic transmission-delay density vs histograms of 1e5 packets.

    Both the change-of-variables sample and the tandem simulator's clipped
    per-packet delays must be within the limit.
    """
    cfg = config.load(overrides={"seed": seed})
    res = experiments.txpdf(cfg)
    ok = res.l1 < TXPDF_L1 and res.l1_simulated < TXPDF_L1 and res.seconds < TXPDF_SECONDS
    return Criterion(1, "txpdf_l1", ok, {"l1": res.l1, "l1_clipped_simulation": res.l1_simulated,
                      "runtime_s": res.seconds, "packets": res.n_packets},
                     {"l1_max": TXPDF_L1, "runtime_max_s": TXPDF_SECONDS})


def zeta_points(ch, stats, n: int = 100) -> np.ndarray:
    """``n`` delays spanning the bulk of psi_T (interference mean +- 6 sigma)."""
    n0 = chn.noise_floor(ch)
    lo_I = max(stats.mu_I - 6 * stats.sigma_I, -0.99 * n0)
    a, b = chn.transmission_time(ch, lo_I), chn.transmission_time(ch, stats.mu_I + 6 * stats.sigma_I)
    return np.linspace(a, b, n)


@_timed
def zeta_is_derivative() -> Criterion:
    """Jacobian of the interference-to-delay map vs adaptive finite differences."""
    worst = {}
    for name in ("validation", "fig3", "fig4"):
        cfg = config.from_dict({"preset": name})
        ch, stats = cfg.channel, cfg.stats
        x = zeta_points(ch, stats)
        fd = differentiate.derivative(lambda a: delay.upsilon(a, ch), x, initial_step=1e-3 * x,
                                      tolerances={"rtol": 1e-12})
        rel = np.abs(delay.zeta(x, ch) - fd.df) / np.abs(fd.df)
        worst[name] = float(rel.max())
    err = max(worst.values())
    return Criterion(2, "zeta_finite_difference", err < ZETA_REL,
                     {"max_rel_err": err, **{f"{k}_rel_err": v for k, v in worst.items()}, "points": 100},
                     {"rel_err_max": ZETA_REL})


@_timed
def txpdf_normalization() -> Criterion:
    """Mass of the tabulated psi_T on the default grid vs Gaussian mass above -N0."""
    errs = {}
    for name in ("validation", "fig3", "fig4"):
        cfg = config.from_dict({"preset": name})
        an = delay.e2e_analysis(cfg.queue, cfg.channel, cfg.stats, delta_max=max(cfg.deltas),
                                n_points=cfg.grid_points)
        target = delay.tx_delay_mass(cfg.channel, cfg.stats)
        errs[name] = abs(an.psi_T.mass() - target)
    err = max(errs.values())
    return Criterion(3, "txpdf_normalization", err < NORMALIZATION_ABS,
                     {"max_abs_err": err, **{f"{k}_abs_err": v for k, v in errs.items()}},
                     {"abs_err_max": NORMALIZATION_ABS})


def mm1_oracle_error(lam: float = 0.5, mu: float = 1.0, horizon: float = 60.0,
                     n_points: int = delay.DEFAULT_GRID_POINTS) -> float:
    """Max error of the truncated series against 1 - rho exp(-(mu - lam) t)."""
    grid = Grid.covering(horizon, n_points)
    t = grid.t
    service_cdf = -np.expm1(-mu * t)
    residual = delay.residual_from_service(service_cdf, mu, grid)
    q = delay.QueueParams(lambda1=lam / 10, mu1=10 * mu, lambda2=lam, mu2=mu)
    W = delay.q2_queueing_cdf(q, residual)
    exact = 1.0 - (lam / mu) * np.exp(-(mu - lam) * t)
    return float(np.max(np.abs(W.values - exact)))


@_timed
def mg1_series_oracle() -> Criterion:
    errs = {f"rho={r:g}": mm1_oracle_error(lam=r) for r in (0.2, 0.5, 0.8)}
    err = max(errs.values())
    return Criterion(4, "mm1_waiting_oracle", err < MM1_ABS, {"max_abs_err": err, **errs},
                     {"abs_err_max": MM1_ABS})


@_timed
def e2e_matches_simulation(seed: int | None = None) -> Criterion:
    """Analytic end-to-end CDF vs a 1e5-request steady-state simulation."""
    cfg = config.load(overrides={"seed": seed})
    an = delay.e2e_analysis(cfg.queue, cfg.channel, cfg.stats, delta_max=max(cfg.deltas),
                            n_points=cfg.grid_points)
    sim = run_tandem(cfg.sim_config())
    ks = ks_against_samples(an.Phi, sim.e2e)
    gaps = {f"dR@{d:g}": abs(float(an.reliability(d)) - sim.reliability(d)) for d in cfg.deltas}
    worst = max(gaps.values())
    ok = ks < E2E_KS and worst < E2E_REL_ABS and len(sim.e2e) >= 100_000
    return Criterion(5, "e2e_vs_simulation", ok, {"ks": ks, "requests": len(sim.e2e), **gaps},
                     {"ks_max": E2E_KS, "reliability_gap_max": E2E_REL_ABS})


@_timed
def monotonicity() -> Criterion:
    """Direction of every sweep: up in W and delta, down in omega and d0, steeper for larger d0."""
    bw_cfg = config.from_dict({"preset": "fig3"})
    bw = experiments.sweep_bandwidth(bw_cfg)
    cols = experiments.rel_columns(bw_cfg.deltas)
    viol = {}
    y = np.array([[r[c] for c in cols] for r in bw])
    viol["W"] = float(max(0.0, -np.diff(y, axis=0).min()))
    viol["delta"] = float(max(0.0, -np.diff(y, axis=1).min()))

    rg_cfg = config.from_dict({"preset": "fig4"})
    rows = experiments.sweep_region(rg_cfg)
    d0s = rg_cfg.sweep("region")["d0"]
    rcols = experiments.rel_columns(rg_cfg.deltas)
    grid = np.array([[[r[c] for c in rcols] for r in sorted((r for r in rows if r["d0"] == d0),
                                                            key=lambda r: r["omega"])] for d0 in d0s])
    viol["omega"] = float(max(0.0, np.diff(grid, axis=1).max()))
    viol["d0"] = float(max(0.0, np.diff(grid, axis=0).max())) if len(d0s) > 1 else 0.0
    viol["delta_region"] = float(max(0.0, -np.diff(grid, axis=2).min()))
    steep = {c: [experiments.max_negative_slope(rows, d0, c) for d0 in d0s] for c in rcols}
    viol["slope_d0"] = float(max(0.0, max(-np.diff(v).min() for v in steep.values()))) if len(d0s) > 1 else 0.0
    strict = all(np.diff(steep[rcols[0]]) > 0)
    ok = all(v <= MONOTONE_TOL for v in viol.values()) and strict
    measured = {f"violation_{k}": v for k, v in viol.items()}
    measured[f"steepest_drop_{rcols[0]}"] = [round(s, 8) for s in steep[rcols[0]]]
    return Criterion(6, "monotonicity", ok, measured,
                     {"violation_max": MONOTONE_TOL, "steepest_drop": "strictly increasing in d0"})


def headline_numbers(rows: list[dict]) -> dict:
    """First W reaching the target at 30 ms, the rate there, and the Q1/Q2 crossover W."""
    col = experiments.rel_columns([HEADLINE_DELTA])[0]
    hit = next((r for r in rows if r[col] >= HEADLINE_TARGET), None)
    W = np.array([r["W"] for r in rows])
    gap = np.array([r["mean_q2_delay"] - r["mean_q1_delay"] for r in rows])
    cross = math.nan
    idx = np.nonzero((gap[:-1] > 0) & (gap[1:] <= 0))[0]
    if idx.size:
        k = idx[0]
        cross = float(W[k] + (W[k + 1] - W[k]) * gap[k] / (gap[k] - gap[k + 1]))
    return {"W_first_reached": hit["W"] if hit else math.nan,
            "rate_at_W": hit["rate_at_mean_I"] if hit else math.nan,
            "W_saturation": cross}


@_timed
def headline_reproduction() -> Criterion:
    cfg = config.from_dict({"preset": "fig3", "deltas": [SAT_DELTA, 0.020, HEADLINE_DELTA]})
    h = headline_numbers(experiments.sweep_bandwidth(cfg))
    a = abs(h["W_first_reached"] - HEADLINE_W) <= HEADLINE_W_TOL
    b = abs(h["rate_at_W"] / HEADLINE_RATE - 1.0) <= HEADLINE_RATE_REL
    c = abs(h["W_saturation"] - HEADLINE_SAT) <= HEADLINE_SAT_TOL
    return Criterion(7, "headline_numbers", bool(a and b and c),
                     {**h, "a": bool(a), "b": bool(b), "c": bool(c)},
                     {"W_target": HEADLINE_W, "W_tol": HEADLINE_W_TOL, "rate_target": HEADLINE_RATE,
                      "rate_rel_tol": HEADLINE_RATE_REL, "W_sat_target": HEADLINE_SAT,
                      "W_sat_tol": HEADLINE_SAT_TOL},
                     notes="fig3 preset is a fitted reconstruction of the unstated geometry")


def geometry_samples(dep, p: float, A0: float, n: int, seed) -> tuple[float, np.ndarray]:
    """Smallest SBS spacing seen and the interference at the room centre, over ``n`` deployments."""
    rng = np.random.default_rng(seed)
    closest = math.inf
    out = np.empty(n)
    for k in range(n):
        d = sample_mhcpp(dep, rng)
        closest = min(closest, d.min_pairwise_distance())
        out[k] = exact_interference(interferer_distances(d), p, A0)
    return closest, out


@_timed
def geometry_moments(seed: int | None = None) -> Criterion:
    """Hard-core spacing, and sampled interference moments vs the closed-form approximation."""
    cfg = config.from_dict({"preset": "fig3"}, overrides={"seed": seed})
    ch, dep = cfg.channel, cfg.deployment
    closest, I = geometry_samples(dep, ch.p, ch.A0, GEOMETRY_DEPLOYMENTS, cfg.seed)
    approx = interference_stats(dep, ch.p, ch.A0)
    mean_rel = float(I.mean() / approx.mu_I - 1.0)
    var_rel = float(I.var(ddof=1) / approx.sigma2_I - 1.0)
    c_mean, c_var = campbell_moments(dep, ch.p, ch.A0)
    hard = closest >= dep.r
    ok = hard and abs(mean_rel) <= GEOMETRY_MEAN_REL and abs(var_rel) <= GEOMETRY_VAR_REL
    return Criterion(8, "geometry", bool(ok),
                     {"hard_core_holds": bool(hard), "min_spacing": closest, "mean_rel_err": mean_rel,
                      "var_rel_err": var_rel, "sample_mean_over_campbell": float(I.mean() / c_mean),
                      "sample_var_over_poisson": float(I.var(ddof=1) / c_var),
                      "deployments": GEOMETRY_DEPLOYMENTS},
                     {"mean_rel_max": GEOMETRY_MEAN_REL, "var_rel_max": GEOMETRY_VAR_REL})


def _halving_gap(q, ch, stats, deltas, n_points) -> float:
    horizon = delay.default_horizon(q.with_(mu2=delay.mean_service_rate_q2(ch, stats)), ch, stats, max(deltas))
    coarse = Grid.covering(horizon, n_points)
    a = delay.e2e_analysis(q, ch, stats, grid=coarse).reliability(deltas)
    b = delay.e2e_analysis(q, ch, stats, grid=coarse.refined(2)).reliability(deltas)
    return float(np.max(np.abs(a - b)))


@_timed
def grid_convergence() -> Criterion:
    """Every reliability reported by the presets and sweeps, at step h and h/2."""
    gaps = {}
    cfg = config.from_dict({"preset": "validation"})
    gaps["validation"] = _halving_gap(cfg.queue, cfg.channel, cfg.stats, cfg.deltas, cfg.grid_points)
    bw = config.from_dict({"preset": "fig3"})
    gaps["fig3_bandwidth"] = max(
        _halving_gap(bw.queue, ch, interference_stats(bw.deployment, ch.p, ch.A0), bw.deltas, bw.grid_points)
        for ch in (bw.channel.with_(W=float(W)) for W in config.sweep_values(bw.sweep("bandwidth"))))
    rg = config.from_dict({"preset": "fig4"})
    sw = rg.sweep("region")
    worst = 0.0
    for d0 in sw["d0"]:
        ch = rg.channel.with_(d0=d0)
        for om in config.sweep_values(sw):
            stats = interference_stats(replace(rg.deployment, omega=float(om)), ch.p, ch.A0)
            worst = max(worst, _halving_gap(rg.queue, ch, stats, rg.deltas, rg.grid_points))
    gaps["fig4_region"] = worst
    err = max(gaps.values())
    return Criterion(9, "grid_convergence", err < CONVERGENCE_ABS, {"max_abs_change": err, **gaps},
                     {"abs_change_max": CONVERGENCE_ABS})


ALL = (txpdf_matches_simulation, zeta_is_derivative, txpdf_normalization, mg1_series_oracle,
       e2e_matches_simulation, monotonicity, headline_reproduction, geometry_moments, grid_convergence)
_SEEDED = {txpdf_matches_simulation, e2e_matches_simulation, geometry_moments}


def run_all(seed: int | None = None, only=None) -> list[Criterion]:
    out = []
    for k, fn in enumerate(ALL, start=1):
        if only and k not in only:
            continue
        out.append(fn(seed=seed) if fn in _SEEDED else fn())
    return out
