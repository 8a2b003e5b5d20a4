"""SBS deployment as a Matern type-II hard-core process, and interference at the tagged user."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import spatial


@dataclass(frozen=True)
class DeploymentParams:
    """eta: retained intensity (1/m^2); r: hard-core distance (m);
    omega: radius of non-negligible interference (m); area: side of the square room (m)."""

    eta: float = 0.02
    r: float = 1.0
    omega: float = 8.0
    area: float = 20.0

    def __post_init__(self):
        if not (self.eta > 0 and self.r > 0 and self.area > 0):
            raise ValueError("eta, r and area must be positive")
        if not self.omega > self.r:
            raise ValueError(f"omega ({self.omega}) must exceed the hard-core distance r ({self.r})")

    @property
    def packing(self) -> float:
        """eta * pi * r^2; type-II thinning can only reach values below 1."""
        return self.eta * math.pi * self.r**2

    @property
    def parent_intensity(self) -> float:
        if self.packing >= 1.0:
            raise ValueError(
                f"retained intensity {self.eta} is infeasible for a type-II process with r={self.r} "
                f"(eta*pi*r^2 = {self.packing:.3f} >= 1)")
        return -math.log1p(-self.packing) / (math.pi * self.r**2)

    @property
    def center(self) -> np.ndarray:
        return np.array([self.area / 2.0, self.area / 2.0])


@dataclass
class Deployment:
    positions: np.ndarray
    params: DeploymentParams

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 2)

    def __len__(self):
        return len(self.positions)

    def min_pairwise_distance(self) -> float:
        if len(self) < 2:
            return math.inf
        d, _ = spatial.cKDTree(self.positions).query(self.positions, k=2)
        return float(d[:, 1].min())

    def to_csv(self, path, header: dict | None = None):
        with open(path, "w", newline="") as fh:
            info = {"eta": self.params.eta, "r": self.params.r, "omega": self.params.omega,
                    "area": self.params.area, "n_points": len(self)}
            info.update(header or {})
            for k, v in info.items():
                fh.write(f"# {k}: {v}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "y"])
            w.writerows(self.positions.tolist())


@dataclass(frozen=True)
class InterferenceStats:
    mu_I: float
    sigma2_I: float
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.sigma2_I > 0:
            raise ValueError("interference variance must be positive")

    @property
    def sigma_I(self) -> float:
        return math.sqrt(self.sigma2_I)

    def scaled(self, sigma_factor: float = 1.0, mean_factor: float = 1.0) -> "InterferenceStats":
        return InterferenceStats(self.mu_I * mean_factor, self.sigma2_I * sigma_factor**2)


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_mhcpp(params: DeploymentParams, seed, window=None) -> Deployment:
    """Matern type-II hard-core sample on the square [0, area]^2.

    Parents are Poisson with the intensity whose type-II thinning retains
    ``params.eta`` on average.  Each parent gets a uniform mark and is removed
    if any parent within ``r`` has a smaller mark.  SBSs exist only inside
    the room: no wrap-around and no parents beyond the walls.

    ``window=(x0, x1, y0, y1)`` restricts the output to a sub-rectangle; the
    restriction has the same law as cropping a full-room sample.
    """
    rng = _rng(seed)
    r = params.r
    x0, x1, y0, y1 = window if window is not None else (0.0, params.area, 0.0, params.area)
    x0, y0 = max(x0, 0.0), max(y0, 0.0)
    x1, y1 = min(x1, params.area), min(y1, params.area)
    lo = np.array([max(x0 - r, 0.0), max(y0 - r, 0.0)])
    span = np.array([min(x1 + r, params.area), min(y1 + r, params.area)]) - lo
    n = rng.poisson(params.parent_intensity * span[0] * span[1])
    pts = lo + rng.random((n, 2)) * span
    marks = rng.random(n)
    keep = np.ones(n, dtype=bool)
    if n > 1:
        pairs = spatial.cKDTree(pts).query_pairs(r, output_type="ndarray")
        if len(pairs):
            i, j = pairs[:, 0], pairs[:, 1]
            keep[np.where(marks[i] > marks[j], i, j)] = False
    inside = (pts[:, 0] >= x0) & (pts[:, 0] <= x1) & (pts[:, 1] >= y0) & (pts[:, 1] <= y1)
    return Deployment(pts[keep & inside], params)


def interferer_distances(dep: Deployment, user=None) -> np.ndarray:
    """Distances from the user to deployed SBSs with r <= d <= omega.

    The serving SBS is not part of ``dep``; it sits at d0 by construction.
    SBSs beyond omega add no interference.
    """
    user = dep.params.center if user is None else np.asarray(user, dtype=float)
    if len(dep) == 0:
        return np.empty(0)
    d = np.hypot(*(dep.positions - user).T)
    return d[(d >= dep.params.r) & (d <= dep.params.omega)]


def distance_vector(dep: Deployment, d0: float, user=None) -> np.ndarray:
    """(d0, d1, ..., dM): tagged-link distance followed by interferer distances."""
    return np.concatenate([[d0], interferer_distances(dep, user)])


def exact_interference(dists, p: float, A0: float) -> float:
    """Combined interference sum_i p A0 d_i^-2 in watts."""
    d = np.asarray(dists, dtype=float)
    if np.any(d <= 0):
        raise ValueError("interferer at zero distance")
    return float(np.sum(p * A0 / d**2))


def interference_stats(params: DeploymentParams, p: float, A0: float) -> InterferenceStats:
    """Mean and variance of the Gaussian interference approximation."""
    r, om, eta = params.r, params.omega, params.eta
    if om <= r:
        raise ValueError("omega must exceed r")
    crowd = math.pi * om**2 * eta / 2.0
    mu = p * A0 * (math.log(om) - math.log(r)) / (om**2 - r**2) * crowd
    var = (p * A0) ** 2 * crowd / (2.0 * r**2 * om**2)
    return InterferenceStats(mu, var)


def campbell_moments(params: DeploymentParams, p: float, A0: float) -> tuple[float, float]:
    """Mean and variance of sum p A0 d^-2 over a Poisson field of intensity eta in r <= d <= omega.

    Reference values for the stationary point process (mean is exact for any
    stationary process, variance is the Poisson one); used to report how far
    the Gaussian-approximation moments are from the geometry.
    """
    r, om, eta = params.r, params.omega, params.eta
    mean = p * A0 * 2.0 * math.pi * eta * math.log(om / r)
    var = (p * A0) ** 2 * math.pi * eta * (1.0 / r**2 - 1.0 / om**2)
    return mean, var


def sample_interference_gaussian(stats: InterferenceStats, seed, size=None, clip: bool = True):
    """Normal(mu_I, sigma_I^2) draws, clipped at zero unless ``clip=False``."""
    x = _rng(seed).normal(stats.mu_I, stats.sigma_I, size=size)
    if clip:
        x = np.maximum(x, 0.0)
    return x


def sample_exact_interference(params: DeploymentParams, p: float, A0: float, seed,
                              size: int, user=None) -> np.ndarray:
    """Interference at the user over ``size`` independent deployments."""
    rng = _rng(seed)
    user = params.center if user is None else np.asarray(user, dtype=float)
    reach = params.omega
    window = (user[0] - reach, user[0] + reach, user[1] - reach, user[1] + reach)
    out = np.empty(size)
    for k in range(size):
        dep = sample_mhcpp(params, rng, window=window)
        out[k] = exact_interference(interferer_distances(dep, user), p, A0)
    return out


def gaussian_approximation_error(exact_samples, stats: InterferenceStats, clip: bool = True) -> float:
    """KS distance between exact-geometry interference and the (clipped) Gaussian law."""
    from scipy import stats as st

    x = np.sort(np.asarray(exact_samples, dtype=float))
    n = len(x)
    F = st.norm.cdf(x, loc=stats.mu_I, scale=stats.sigma_I)
    if clip:
        F = np.where(x >= 0, F, 0.0)
    upper = np.arange(1, n + 1) / n - F
    lower = F - np.arange(n) / n
    return float(max(upper.max(), lower.max()))
