"""Discrete-event Monte Carlo of the processing + transmission tandem.

Requests arrive as a Poisson stream, wait for an exponential processing
server (Q1), then queue for the THz link (Q2) whose service time is
L / capacity(I) with the interference I redrawn for every packet.  Both
queues are FCFS with unbounded buffers.
"""
from __future__ import annotations

import csv
import heapq
import io
from collections import deque
from dataclasses import asdict, dataclass, field

import numpy as np

from . import channel as chn
from .channel import ChannelParams
from .delay import QueueParams, StabilityError
from .geometry import (DeploymentParams, InterferenceStats, exact_interference, interference_stats,
                       interferer_distances, sample_exact_interference,
                       sample_interference_gaussian, sample_mhcpp)
from .numerics import Grid, TabulatedDist

MODES = ("gaussian", "exact_geometry", "exact_geometry_frozen")
FIELDS = ("arrival", "q1_wait", "q1_service", "q2_wait", "q2_service", "e2e")


class DivergenceError(RuntimeError):
    """A simulated queue grew past the configured cap."""


@dataclass(frozen=True)
class SimConfig:
    """One replication of the tandem.

    interference_mode:
      gaussian               clipped Normal(mu_I, sigma_I^2) per packet
      exact_geometry         fresh hard-core deployment per packet
      exact_geometry_frozen  one deployment for the whole run
    ``warmup`` defaults to 10% of ``n_requests``.  ``stats`` overrides the
    Gaussian moments (otherwise derived from the deployment parameters).
    """

    channel: ChannelParams
    deployment: DeploymentParams
    queue: QueueParams
    n_requests: int = 111_112
    seed: int = 0
    interference_mode: str = "gaussian"
    warmup: int | None = None
    queue_cap: int = 100_000
    deltas: tuple = (0.010, 0.020, 0.030)
    stats: InterferenceStats | None = None

    def __post_init__(self):
        if self.interference_mode not in MODES:
            raise ValueError(f"interference_mode must be one of {MODES}, got {self.interference_mode!r}")
        if self.warmup is None:
            object.__setattr__(self, "warmup", self.n_requests // 10)
        if not self.n_requests > self.warmup >= 0:
            raise ValueError(f"need n_requests > warmup >= 0 (got {self.n_requests}, {self.warmup})")
        if self.queue_cap < 1:
            raise ValueError("queue_cap must be >= 1")
        object.__setattr__(self, "deltas", tuple(float(d) for d in self.deltas))

    @property
    def gaussian_stats(self) -> InterferenceStats:
        if self.stats is not None:
            return self.stats
        return interference_stats(self.deployment, self.channel.p, self.channel.A0)

    def provenance(self) -> dict:
        info = {"seed": self.seed, "n_requests": self.n_requests, "warmup": self.warmup,
                "interference_mode": self.interference_mode, "queue_cap": self.queue_cap}
        for prefix, obj in (("channel", self.channel), ("deployment", self.deployment)):
            info.update({f"{prefix}.{k}": v for k, v in asdict(obj).items()})
        info.update({f"queue.{k}": v for k, v in asdict(self.queue).items()})
        if self.interference_mode == "gaussian":
            s = self.gaussian_stats
            info.update({"mu_I": s.mu_I, "sigma_I": s.sigma_I})
        return info


@dataclass
class SimResult:
    """Per-request records (all requests, in arrival order) and steady-state summary."""

    records: dict
    config: SimConfig
    summary: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.records["arrival"])

    def steady(self, name: str) -> np.ndarray:
        """Column ``name`` with the warmup requests dropped."""
        return self.records[name][self.config.warmup:]

    @property
    def e2e(self) -> np.ndarray:
        return self.steady("e2e")

    def reliability(self, delta) -> np.ndarray | float:
        x = np.sort(self.e2e)
        out = np.searchsorted(x, np.asarray(delta, dtype=float), side="right") / len(x)
        return out.item() if np.ndim(out) == 0 else out

    def q1_departures(self) -> np.ndarray:
        r = self.records
        return r["arrival"] + r["q1_wait"] + r["q1_service"]

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        for k, v in self.config.provenance().items():
            buf.write(f"# {k}: {v}\n")
        for k, v in self.summary.items():
            buf.write(f"# summary.{k}: {v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("request", "steady") + FIELDS)
        cols = [self.records[f] for f in FIELDS]
        for i in range(len(self)):
            w.writerow([i, int(i >= self.config.warmup)] + [repr(float(c[i])) for c in cols])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def summary_text(self) -> str:
        return "".join(f"{k}: {v}\n" for k, v in self.summary.items())


def _summarize(e2e, q1_sojourn, q2_wait, q2_service, deltas) -> dict:
    x = np.sort(e2e)
    out = {"n": len(x),
           "mean_q1_delay": float(np.mean(q1_sojourn)),
           "mean_q2_wait": float(np.mean(q2_wait)),
           "mean_q2_service": float(np.mean(q2_service)),
           "mean_q2_delay": float(np.mean(q2_wait) + np.mean(q2_service)),
           "mean_e2e": float(np.mean(x))}
    for d in deltas:
        out[f"reliability@{d:g}"] = float(np.searchsorted(x, d, side="right") / len(x))
    return out


def _service_times(cfg: SimConfig, rng: np.random.Generator) -> np.ndarray:
    ch, n = cfg.channel, cfg.n_requests
    if cfg.interference_mode == "gaussian":
        interference = sample_interference_gaussian(cfg.gaussian_stats, rng, size=n)
    elif cfg.interference_mode == "exact_geometry":
        interference = sample_exact_interference(cfg.deployment, ch.p, ch.A0, rng, size=n)
    else:
        dep = sample_mhcpp(cfg.deployment, rng)
        interference = np.full(n, exact_interference(interferer_distances(dep), ch.p, ch.A0))
    return np.asarray(chn.transmission_time(ch, interference), dtype=float)


def sample_tx_delays(ch: ChannelParams, stats: InterferenceStats, n: int, seed) -> np.ndarray:
    """Per-packet delays L / capacity(I) for unclipped Gaussian I.

    Draws with I <= -N0 have no finite SINR; they come back as NaN so the
    caller can count them against the total, mirroring the mass the analytic
    density leaves out.
    """
    I = sample_interference_gaussian(stats, seed, size=n, clip=False)
    out = np.full(n, np.nan)
    ok = I > -chn.noise_floor(ch)
    out[ok] = chn.transmission_time(ch, I[ok])
    return out


_ARRIVE, _Q1_DONE, _Q2_DONE = 0, 1, 2


def run_tandem(cfg: SimConfig) -> SimResult:
    """Event-driven run; identical configs give bit-identical results.

    Arrivals, processing times and interference use separate child streams of
    ``cfg.seed``, so switching the interference mode leaves the arrival and
    processing sample paths untouched.
    """
    q, n = cfg.queue, cfg.n_requests
    rng_arr, rng_q1, rng_q2 = (np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(3))
    arrivals = np.cumsum(rng_arr.exponential(1.0 / q.lambda1, size=n))
    s1 = rng_q1.exponential(1.0 / q.mu1, size=n)
    s2 = _service_times(cfg, rng_q2)
    rho2 = q.lambda1 * float(np.mean(s2))
    if rho2 >= 1.0:
        raise StabilityError(f"Q2 unstable: lambda1 * E[service] = {rho2:.4g} >= 1")

    start1 = np.empty(n)
    start2 = np.empty(n)
    done2 = np.empty(n)
    events = [(arrivals[0], 0, _ARRIVE, 0)]
    seq = 1
    wait1: deque = deque()
    wait2: deque = deque()
    busy1 = busy2 = False

    def push(t, kind, i):
        nonlocal seq
        heapq.heappush(events, (t, seq, kind, i))
        seq += 1

    while events:
        t, _, kind, i = heapq.heappop(events)
        if kind == _ARRIVE:
            if i + 1 < n:
                push(arrivals[i + 1], _ARRIVE, i + 1)
            if busy1:
                wait1.append(i)
                if len(wait1) > cfg.queue_cap:
                    raise DivergenceError(f"Q1 length exceeded {cfg.queue_cap} at t={t:.6g}")
            else:
                busy1 = True
                start1[i] = t
                push(t + s1[i], _Q1_DONE, i)
        elif kind == _Q1_DONE:
            if wait1:
                j = wait1.popleft()
                start1[j] = t
                push(t + s1[j], _Q1_DONE, j)
            else:
                busy1 = False
            if busy2:
                wait2.append((i, t))
                if len(wait2) > cfg.queue_cap:
                    raise DivergenceError(f"Q2 length exceeded {cfg.queue_cap} at t={t:.6g}")
            else:
                busy2 = True
                start2[i] = t
                push(t + s2[i], _Q2_DONE, i)
        else:
            done2[i] = t
            if wait2:
                j, _ = wait2.popleft()
                start2[j] = t
                push(t + s2[j], _Q2_DONE, j)
            else:
                busy2 = False

    dep1 = start1 + s1
    rec = {"arrival": arrivals, "q1_wait": start1 - arrivals, "q1_service": s1,
           "q2_wait": start2 - dep1, "q2_service": s2}
    rec["e2e"] = rec["q1_wait"] + rec["q1_service"] + rec["q2_wait"] + rec["q2_service"]
    res = SimResult(rec, cfg)
    w = cfg.warmup
    res.summary = _summarize(rec["e2e"][w:], (rec["q1_wait"] + s1)[w:], rec["q2_wait"][w:],
                             s2[w:], cfg.deltas)
    res.summary["e2e_identity_error"] = float(np.max(np.abs(done2 - arrivals - rec["e2e"])))
    return res


def merge_summaries(results: list[SimResult]) -> dict:
    """Pool the steady-state samples of independent replications.

    The pooled statistics do not depend on the order of ``results``.
    """
    if not results:
        raise ValueError("nothing to merge")
    results = sorted(results, key=lambda r: r.config.seed)
    cat = {f: np.concatenate([r.steady(f) for r in results]) for f in FIELDS}
    out = _summarize(cat["e2e"], cat["q1_wait"] + cat["q1_service"], cat["q2_wait"],
                     cat["q2_service"], results[0].config.deltas)
    out["replications"] = len(results)
    return out


def empirical_dist(samples, grid: Grid) -> tuple[TabulatedDist, TabulatedDist]:
    """Histogram density and ECDF of ``samples`` on ``grid``.

    Bin k collects [t_k - h/2, t_k + h/2), so a repeated value lands in a
    single bin.  Samples past the last bin are counted in the ECDF's
    complement only.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empirical_dist needs at least one sample")
    t, h = grid.t, grid.h
    edges = np.concatenate([t - 0.5 * h, [t[-1] + 0.5 * h]])
    counts, _ = np.histogram(x, bins=edges)
    pdf = TabulatedDist(grid, counts / (x.size * h), "pdf", "empirical_pdf", {"samples": x.size})
    xs = np.sort(x)
    ecdf = TabulatedDist(grid, np.searchsorted(xs, t, side="right") / x.size, "cdf", "ecdf",
                         {"samples": x.size})
    return pdf, ecdf
