"""Analytic delay distributions for the processing (M/M/1) + transmission (M/G/1) tandem.

The transmission delay alpha of an L-bit packet is L / capacity(I), with the
combined interference I Gaussian.  Inverting the capacity gives the
interference level ``upsilon(alpha)`` that makes a transmission last exactly
alpha seconds; its derivative ``zeta`` is the Jacobian of the change of
variables, so ``psi_T(alpha) = zeta(alpha) * g(upsilon(alpha))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats as st

from . import channel as chn
from .channel import ChannelParams
from .geometry import InterferenceStats
from .numerics import Grid, TabulatedDist, cdf_to_pdf, convolve, nfold_series, quadrature

LN2 = math.log(2.0)
DEFAULT_EPS_TAIL = 1e-9
DEFAULT_GRID_POINTS = 2**14 + 1


class StabilityError(ValueError):
    """A queue in the tandem has utilization >= 1."""


class GridCoverageError(ValueError):
    """The tabulation horizon misses more probability than allowed."""


def requests_per_second(rate_bps: float, L: float) -> float:
    """Convert a processing throughput in bit/s into a request service rate."""
    return rate_bps / L


def truncation_order(rho: float, eps_tail: float = DEFAULT_EPS_TAIL) -> int:
    """Smallest Gamma with rho^(Gamma+1) / (1 - rho) < eps_tail."""
    if not 0 <= rho < 1:
        raise StabilityError(f"utilization {rho} must lie in [0, 1)")
    if rho == 0:
        return 0
    g = math.log(eps_tail * (1 - rho)) / math.log(rho) - 1
    gamma = max(0, math.ceil(g))
    while rho ** (gamma + 1) / (1 - rho) >= eps_tail:
        gamma += 1
    return gamma


@dataclass(frozen=True)
class QueueParams:
    """Rates of the two queues (all in 1/s).

    ``lambda2`` defaults to ``lambda1``: the steady-state departure rate of a
    stable M/M/1 queue equals its arrival rate.  Set it to ``mu1`` to follow
    the alternative reading where Q2 is fed at the processing rate.
    ``mu2`` is normally derived from the transmission-delay law.
    """

    lambda1: float = 0.1
    mu1: float = 200.0
    lambda2: float | None = None
    mu2: float | None = None
    eps_tail: float = DEFAULT_EPS_TAIL
    Gamma: int | None = None

    def __post_init__(self):
        if not self.lambda1 > 0:
            raise ValueError("lambda1 must be positive")
        if not self.mu1 > self.lambda1:
            raise StabilityError(f"Q1 unstable: mu1={self.mu1} <= lambda1={self.lambda1}")
        if self.lambda2 is not None and not self.lambda2 > 0:
            raise ValueError("lambda2 must be positive")
        if not 0 < self.eps_tail < 1:
            raise ValueError("eps_tail must be in (0, 1)")

    @property
    def arrival_rate_q2(self) -> float:
        return self.lambda1 if self.lambda2 is None else self.lambda2

    @property
    def rho(self) -> float:
        if self.mu2 is None:
            raise ValueError("mu2 unknown; derive it with mean_service_rate_q2")
        return self.arrival_rate_q2 / self.mu2

    @property
    def truncation(self) -> int:
        if self.Gamma is not None:
            return self.Gamma
        return truncation_order(self.rho, self.eps_tail)

    def with_(self, **changes) -> "QueueParams":
        return replace(self, **changes)


# ---------------------------------------------------------------------------
# Q1

def mm1_waiting_pdf(q: QueueParams, t):
    """Sojourn-time density (mu1 - lambda1) exp(-(mu1 - lambda1) t) of Q1."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    a = q.mu1 - q.lambda1
    out = a * np.exp(-a * t)
    return out.item() if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# transmission delay

def _exponent(alpha, ch: ChannelParams):
    return ch.L / (ch.W * alpha) * LN2


def upsilon(alpha, ch: ChannelParams):
    """Combined interference for which L bits take exactly ``alpha`` seconds.

    Increasing in alpha, from -N0 (alpha -> 0) to +inf.
    """
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha <= 0):
        raise ValueError("alpha must be > 0")
    with np.errstate(over="ignore"):
        out = chn.tagged_received_power(ch) / np.expm1(_exponent(alpha, ch)) - chn.noise_floor(ch)
    return out.item() if out.ndim == 0 else out


def zeta(alpha, ch: ChannelParams):
    """d upsilon / d alpha in closed form."""
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha <= 0):
        raise ValueError("alpha must be > 0")
    x = _exponent(alpha, ch)
    # 2^y / (2^y - 1)^2 == 1 / (4 sinh^2(y ln2 / 2)); the sinh form does not overflow to nan
    with np.errstate(over="ignore"):
        s = np.sinh(0.5 * x)
        out = LN2 * chn.tagged_received_power(ch) * ch.L / (ch.W * alpha**2) / (4.0 * s * s)
    return out.item() if out.ndim == 0 else out


def tx_time(ch: ChannelParams, interference):
    """Inverse of upsilon: alpha = L / capacity(I), for I > -N0."""
    return chn.transmission_time(ch, interference)


def tx_delay_pdf(alpha, ch: ChannelParams, stats: InterferenceStats):
    """Density of the transmission delay at ``alpha`` (> 0)."""
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha <= 0):
        raise ValueError("alpha must be > 0")
    z = (upsilon(alpha, ch) - stats.mu_I) / stats.sigma_I
    out = zeta(alpha, ch) / (math.sqrt(2 * math.pi) * stats.sigma_I) * np.exp(-0.5 * z * z)
    return out.item() if np.ndim(out) == 0 else out


def tx_delay_mass(ch: ChannelParams, stats: InterferenceStats) -> float:
    """Total mass of psi_T: P(Normal(mu_I, sigma_I^2) > -N0)."""
    return float(st.norm.sf(-chn.noise_floor(ch), loc=stats.mu_I, scale=stats.sigma_I))


def tx_support(ch: ChannelParams, stats: InterferenceStats, k: float = 10.0) -> tuple[float, float]:
    """Interval of alpha carrying all but ~exp(-k^2/2) of psi_T."""
    n0 = chn.noise_floor(ch)
    lo_I = stats.mu_I - k * stats.sigma_I
    lo = 0.0 if lo_I <= -n0 else float(tx_time(ch, lo_I))
    hi = float(tx_time(ch, stats.mu_I + k * stats.sigma_I))
    return lo, hi


def tabulate_tx_delay(ch: ChannelParams, stats: InterferenceStats, grid: Grid) -> TabulatedDist:
    t = grid.t
    vals = np.zeros_like(t)
    pos = t > 0
    vals[pos] = tx_delay_pdf(t[pos], ch, stats)
    return TabulatedDist(grid, vals, "pdf", "psi_T")


def _tx_local_grid(ch, stats, n_points=DEFAULT_GRID_POINTS) -> Grid:
    _, hi = tx_support(ch, stats)
    return Grid.covering(hi, n_points)


def mean_tx_delay(ch: ChannelParams, stats: InterferenceStats, grid: Grid | None = None) -> float:
    """E[alpha] of the delivered packets (psi_T renormalised by its mass)."""
    grid = grid or _tx_local_grid(ch, stats)
    psi = tabulate_tx_delay(ch, stats, grid)
    mass = psi.mass()
    if psi.values[-1] * grid.h > DEFAULT_EPS_TAIL * max(mass, 1e-300):
        tail = st.norm.sf(float(upsilon(grid.horizon, ch)), stats.mu_I, stats.sigma_I)
        if tail > DEFAULT_EPS_TAIL:
            raise GridCoverageError(f"transmission delay has mass {tail:.3g} beyond the grid end")
    return psi.mean() / mass


def mean_service_rate_q2(ch: ChannelParams, stats: InterferenceStats, grid: Grid | None = None) -> float:
    """mu2 = 1 / E[alpha]."""
    return 1.0 / mean_tx_delay(ch, stats, grid)


# ---------------------------------------------------------------------------
# Q2 residual service and waiting time

def service_cdf(ch: ChannelParams, stats: InterferenceStats, t):
    """CDF of the delivered-packet transmission delay, via the interference law.

    P(alpha <= t) = P(-N0 < I <= upsilon(t)), normalised by P(I > -N0).
    """
    t = np.asarray(t, dtype=float)
    n0 = chn.noise_floor(ch)
    out = np.zeros_like(t)
    pos = t > 0
    ups = upsilon(t[pos], ch)
    lo = st.norm.cdf(-n0, stats.mu_I, stats.sigma_I)
    out[pos] = (st.norm.cdf(ups, stats.mu_I, stats.sigma_I) - lo) / (1.0 - lo)
    return out.item() if out.ndim == 0 else out


def residual_from_service(service_cdf_values, mu2: float, grid: Grid) -> TabulatedDist:
    """Residual-service density mu2 (1 - F(t)) for any tabulated service CDF."""
    vals = mu2 * (1.0 - np.asarray(service_cdf_values, dtype=float))
    return TabulatedDist(grid, np.clip(vals, 0.0, None), "pdf", "residual")


def residual_pdf(ch: ChannelParams, stats: InterferenceStats, mu2: float, grid: Grid) -> TabulatedDist:
    """Residual-service density mu2 (1 - F_T(t)) on the grid."""
    return residual_from_service(service_cdf(ch, stats, grid.t), mu2, grid)


def residual_cdf(ch: ChannelParams, stats: InterferenceStats, mu2: float, t):
    """R(t) = int_0^t mu2 (1 - F_T(x)) dx (scalar or array of t >= 0)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    tmax = float(t.max())
    if tmax == 0:
        return 0.0 if t.size == 1 else np.zeros_like(t)
    grid = Grid.covering(tmax, DEFAULT_GRID_POINTS)
    R = residual_pdf(ch, stats, mu2, grid).to_cdf()
    out = np.interp(t, grid.t, R.values)
    return float(out[0]) if out.size == 1 else out


def q2_queueing_cdf(q: QueueParams, R: TabulatedDist) -> TabulatedDist:
    """Waiting time in Q2: (1 - rho) sum_{n<=Gamma} rho^n R^(n)(t).

    ``R`` is the residual service law (pdf preferred; a cdf is differentiated).
    """
    rho = q.rho
    if not rho < 1:
        raise StabilityError(f"Q2 unstable: rho = {rho:.4g}")
    gamma = q.truncation
    pdf = R if R.kind == "pdf" else cdf_to_pdf(R)
    weights = (1.0 - rho) * rho ** np.arange(gamma + 1)
    out = nfold_series(pdf, weights)
    out.name = "Psi_Q2"
    out.meta.update({"rho": rho, "Gamma": gamma})
    return out


# ---------------------------------------------------------------------------
# end-to-end

@dataclass
class E2EAnalysis:
    """Every tabulated piece of the end-to-end delay chain on one grid."""

    grid: Grid
    queue: QueueParams
    channel: ChannelParams
    stats: InterferenceStats
    psi1: TabulatedDist
    psi_T: TabulatedDist
    residual: TabulatedDist
    Psi_Q2: TabulatedDist
    Psi_2: TabulatedDist
    Phi: TabulatedDist
    lost_mass: float
    info: dict = field(default_factory=dict)

    @property
    def mu2(self) -> float:
        return self.queue.mu2

    @property
    def rho(self) -> float:
        return self.queue.rho

    def reliability(self, delta):
        delta = np.asarray(delta, dtype=float)
        if np.any(delta < 0):
            raise ValueError("delta must be >= 0")
        return self.Phi(delta)

    def mean_q1_delay(self) -> float:
        return 1.0 / (self.queue.mu1 - self.queue.lambda1)

    def mean_q2_wait(self) -> float:
        return self.Psi_Q2.mean()

    def mean_q2_delay(self) -> float:
        """Waiting plus transmission in Q2."""
        return self.mean_q2_wait() + 1.0 / self.mu2

    def mean_e2e_delay(self) -> float:
        return self.mean_q1_delay() + self.mean_q2_delay()


def _pk_mean_wait(lam2: float, ch, stats, mu2: float) -> float:
    grid = _tx_local_grid(ch, stats)
    psi = tabulate_tx_delay(ch, stats, grid)
    m2 = quadrature(grid.t**2 * psi.values, grid.h) / psi.mass()
    rho = lam2 / mu2
    return lam2 * m2 / (2.0 * (1.0 - rho))


def default_horizon(q: QueueParams, ch: ChannelParams, stats: InterferenceStats,
                    delta_max: float = 0.0) -> float:
    """Horizon long enough that all component tails beyond it are below eps_tail.

    At least ``delta_max`` and at least 8 mean end-to-end delays.
    """
    mu2 = q.mu2 or mean_service_rate_q2(ch, stats)
    lam2 = q.arrival_rate_q2
    rho = lam2 / mu2
    if rho >= 1:
        raise StabilityError(f"Q2 unstable: rho = {rho:.4g}")
    a1 = q.mu1 - q.lambda1
    _, tx_hi = tx_support(ch, stats, k=7.0)
    wq = _pk_mean_wait(lam2, ch, stats, mu2)
    mean = 1.0 / a1 + 1.0 / mu2 + wq
    log_eps = math.log(1.0 / q.eps_tail)
    # the Q2 wait has an exponential-type tail; scale its mean by log(rho/eps) as a bound on the quantile
    q2_tail = wq / max(rho, 1e-300) * max(math.log(max(rho, 1e-300) / q.eps_tail), 0.0) if wq > 0 else 0.0
    tails = log_eps / a1 + tx_hi + q2_tail
    return max(delta_max, 8.0 * mean, tails)


def e2e_analysis(q: QueueParams, ch: ChannelParams, stats: InterferenceStats,
                 grid: Grid | None = None, delta_max: float = 0.0,
                 n_points: int = DEFAULT_GRID_POINTS) -> E2EAnalysis:
    """Tabulate psi_1, psi_T, R, Psi_Q2, Psi_2 = Psi_Q2 * psi_T and Phi = psi_1 * Psi_2."""
    if q.mu2 is None:
        q = q.with_(mu2=mean_service_rate_q2(ch, stats))
    rho = q.rho
    if not rho < 1:
        raise StabilityError(f"Q2 unstable: rho = {rho:.4g} (lambda2={q.arrival_rate_q2}, mu2={q.mu2:.4g})")
    if grid is None:
        grid = Grid.covering(default_horizon(q, ch, stats, delta_max), n_points)
    t = grid.t
    psi1 = TabulatedDist(grid, mm1_waiting_pdf(q, t), "pdf", "psi_1")
    psi_T = tabulate_tx_delay(ch, stats, grid)
    residual = residual_pdf(ch, stats, q.mu2, grid)
    Psi_Q2 = q2_queueing_cdf(q, residual)
    Psi_2 = convolve(psi_T, Psi_Q2)
    Psi_2.name = "Psi_2"
    Phi = convolve(psi1, Psi_2)
    Phi.name = "Phi"
    mass = tx_delay_mass(ch, stats)
    an = E2EAnalysis(grid, q, ch, stats, psi1, psi_T, residual, Psi_Q2, Psi_2, Phi,
                     lost_mass=1.0 - mass)
    missing = mass - float(Phi.values[-1])
    an.info.update({"mu2": q.mu2, "rho": rho, "Gamma": q.truncation, "tx_mass": mass,
                    "grid_missing_mass": missing})
    if missing > max(q.eps_tail, 1e-6):
        raise GridCoverageError(
            f"horizon {grid.horizon:.4g} s misses {missing:.3g} of the end-to-end mass")
    return an


def e2e_cdf(q: QueueParams, ch: ChannelParams, stats: InterferenceStats, **kw) -> TabulatedDist:
    return e2e_analysis(q, ch, stats, **kw).Phi


def reliability(q: QueueParams, ch: ChannelParams, stats: InterferenceStats, delta, **kw):
    """P(end-to-end delay <= delta)."""
    delta_arr = np.asarray(delta, dtype=float)
    kw.setdefault("delta_max", float(np.max(delta_arr)) if delta_arr.size else 0.0)
    return e2e_analysis(q, ch, stats, **kw).reliability(delta_arr)
